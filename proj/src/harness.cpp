#include "mlenkbf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>

#include "mlenkbf/csv.hpp"
#include "mlenkbf/errors.hpp"
#include "mlenkbf/kernels.hpp"
#include "mlenkbf/noise.hpp"
#include "mlenkbf/reference.hpp"

namespace mlenkbf {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

struct PlannedPoint {
  bool multilevel = false;
  Variant base = Variant::stochastic;
  double eps = std::numeric_limits<double>::quiet_NaN();
  int level = 0;
  long N = 0;
  LevelPlan plan;

  int finest() const { return multilevel ? plan.L : level; }
};

// "MLEnKBF" -> (true, stochastic), "DEnKBF" -> (false, deterministic).
std::pair<bool, Variant> parse_sweep_variant(const std::string& name) {
  if (name.rfind("ML", 0) == 0) return {true, variant_from_string(name.substr(2))};
  return {false, variant_from_string(name)};
}

int level_for_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw BadEpsilon(eps);
  return static_cast<int>(std::floor(-std::log2(eps)));
}

long single_level_N(const SweepConfig& config, int level) {
  const double n = std::ceil(config.n_scale * std::ldexp(1.0, 2 * level));
  return std::max(config.N_min, static_cast<long>(n));
}

std::vector<PlannedPoint> plan_points(const SweepConfig& config, const std::string& variant) {
  const auto [multilevel, base] = parse_sweep_variant(variant);
  std::vector<PlannedPoint> points;
  for (double eps : config.eps) {
    PlannedPoint p;
    p.multilevel = multilevel;
    p.base = base;
    p.eps = eps;
    if (multilevel) {
      p.plan = plan_allocation(eps, config.c0, config.N_min);
      p.level = p.plan.L;
      p.N = p.plan.total_particles();
    } else {
      p.level = level_for_eps(eps);
      p.N = single_level_N(config, p.level);
    }
    points.push_back(p);
  }
  if (!multilevel) {
    for (int level : config.levels) {
      PlannedPoint p;
      p.base = base;
      p.level = level;
      p.N = single_level_N(config, level);
      points.push_back(p);
    }
  }
  return points;
}

double trajectory_error(const RunRecord& record, const ReferenceTrajectory& ref, bool all_times) {
  const int T = record.T();
  if (!all_times) return (record.estimate[T] - ref.states[T].m).squaredNorm();
  double sum = 0.0;
  for (int t = 0; t <= T; ++t) sum += (record.estimate[t] - ref.states[t].m).squaredNorm();
  return sum / (T + 1);
}

}  // namespace

std::vector<Replicate> make_replicates(const LinearGaussianModel& model, int T, int level_gen,
                                       std::uint64_t base_seed, int repetitions) {
  std::vector<Replicate> reps(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    Replicate& rep = reps[static_cast<std::size_t>(r)];
    rep.index = r;
    rep.path_seed = base_seed ^ static_cast<std::uint64_t>(r);
    rep.filter_seed = mix64(rep.path_seed);
  }
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < repetitions; ++r) {
    Replicate& rep = reps[static_cast<std::size_t>(r)];
    rep.path = generate_path(model, T, level_gen, rep.path_seed);
  }
  return reps;
}

MseEstimate mse_from_errors(const std::vector<double>& squared_errors) {
  const std::size_t n = squared_errors.size();
  if (n < 2) throw TooFewPoints("an MSE estimate needs at least 2 repetitions");
  double mean = 0.0;
  for (double e : squared_errors) mean += e;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double e : squared_errors) ss += (e - mean) * (e - mean);
  MseEstimate out;
  out.mse = mean;
  out.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  out.reps = static_cast<long>(n);
  return out;
}

MseEstimate estimate_mse(const std::vector<Replicate>& replicates,
                         const std::function<double(const Replicate&)>& squared_error) {
  const long n = static_cast<long>(replicates.size());
  std::vector<double> errors(replicates.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long r = 0; r < n; ++r) {
    try {
      errors[static_cast<std::size_t>(r)] = squared_error(replicates[static_cast<std::size_t>(r)]);
    } catch (...) {
#pragma omp critical(mlenkbf_mse_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return mse_from_errors(errors);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw TooFewPoints("a rate fit needs at least 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw NonPositive("rate fit points must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    const double u = std::log(x) - mx, v = std::log(y) - my;
    sxx += u * u;
    sxy += u * v;
    syy += v * v;
  }
  if (sxx == 0.0) throw TooFewPoints("a rate fit needs two distinct x values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.n_points = static_cast<long>(points.size());
  return fit;
}

void write_sweep_header(std::ostream& os) {
  CsvWriter(os).header({"variant", "dx", "dy", "T", "eps", "level", "L", "N_total", "cost_paper",
                        "cost_actual", "mse", "stderr", "reps", "seed", "wall_ms"});
}

void write_sweep_row(std::ostream& os, const SweepRow& row) {
  CsvWriter csv(os);
  csv.field(row.variant).field(row.dx).field(row.dy).field(row.T);
  if (std::isnan(row.eps)) {
    csv.empty();
  } else {
    csv.field(row.eps);
  }
  csv.field(row.level);
  if (row.L >= 0) {
    csv.field(row.L);
  } else {
    csv.empty();
  }
  csv.field(row.N_total).field(row.cost_paper).field(row.cost_actual);
  csv.field(row.mse.mse).field(row.mse.std_error).field(row.mse.reps).field(row.seed);
  csv.field(row.wall_ms);
  csv.end_row();
  csv.flush();
}

void write_rates_csv(std::ostream& os, const std::vector<VariantRate>& rates) {
  CsvWriter csv(os);
  csv.header({"variant", "slope", "intercept", "r2", "n_points"});
  for (const auto& r : rates) {
    csv.field(r.variant).field(r.fit.slope).field(r.fit.intercept).field(r.fit.r2);
    csv.field(r.fit.n_points).end_row();
  }
  csv.flush();
}

SweepResult cost_mse_sweep(const SweepConfig& config, std::ostream& sweep_csv) {
  config.validate();
  const LinearGaussianModel model = load_model(config.model);
  write_sweep_header(sweep_csv);
  SweepResult result;
  if (config.variants.empty()) return result;

  std::vector<std::vector<PlannedPoint>> points;
  int finest = 0;
  for (const auto& v : config.variants) {
    points.push_back(plan_points(config, v));
    for (const auto& p : points.back()) finest = std::max(finest, p.finest());
  }
  const int level_gen = finest + config.headroom;
  const std::vector<Replicate> reps =
      make_replicates(model, config.T, level_gen, config.seed, config.repetitions);
  std::vector<ReferenceTrajectory> refs(reps.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < reps.size(); ++r) refs[r] = run_reference(model, reps[r].path, level_gen);

  for (std::size_t vi = 0; vi < config.variants.size(); ++vi) {
    std::vector<std::pair<double, double>> fit_points;
    for (const PlannedPoint& p : points[vi]) {
      const auto start = std::chrono::steady_clock::now();
      SweepRow row;
      row.variant = config.variants[vi];
      row.dx = model.dx();
      row.dy = model.dy();
      row.T = config.T;
      row.eps = p.eps;
      row.level = p.level;
      row.L = p.multilevel ? p.plan.L : -1;
      row.N_total = p.N;
      row.seed = config.seed;
      if (p.multilevel) {
        row.cost_paper = p.plan.cost * config.T;
        row.cost_actual = p.plan.cost_actual() * config.T;
      } else {
        row.cost_paper = static_cast<double>(p.N) * static_cast<double>(steps_per_unit(p.level)) *
                         config.T;
        row.cost_actual = row.cost_paper;
      }
      row.mse = estimate_mse(reps, [&](const Replicate& rep) {
        const RunRecord rec =
            p.multilevel
                ? ml_estimate(model, rep.path, p.plan, p.base, rep.filter_seed, config.headroom)
                : run_single_level(model, rep.path, p.N, p.level, p.base, rep.filter_seed);
        return trajectory_error(rec, refs[static_cast<std::size_t>(rep.index)],
                                config.mse_all_times);
      });
      row.wall_ms = elapsed_ms(start);
      write_sweep_row(sweep_csv, row);
      fit_points.emplace_back(row.mse.mse, row.cost_paper);
      result.rows.push_back(row);
    }
    if (fit_points.size() >= 2) result.rates.push_back({config.variants[vi], fit_rate(fit_points)});
  }
  return result;
}

namespace {

std::vector<std::pair<double, double>> cost_curve(const std::vector<SweepRow>& rows,
                                                  const std::string& variant) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.variant == variant) pts.emplace_back(std::log(r.mse.mse), std::log(r.cost_paper));
  }
  if (pts.empty()) throw ConfigError("no sweep rows for variant '" + variant + "'");
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

double smallest_common_mse(const std::vector<SweepRow>& rows, const std::string& a,
                           const std::string& b) {
  return std::exp(std::max(cost_curve(rows, a).front().first, cost_curve(rows, b).front().first));
}

double cost_at_mse(const std::vector<SweepRow>& rows, const std::string& variant, double mse) {
  const auto pts = cost_curve(rows, variant);
  if (pts.size() == 1) return std::exp(pts.front().second);
  const double x = std::log(mse);
  std::size_t k = 1;
  while (k + 1 < pts.size() && pts[k].first < x) ++k;
  const auto& [x0, y0] = pts[k - 1];
  const auto& [x1, y1] = pts[k];
  if (x1 == x0) return std::exp(std::min(y0, y1));
  return std::exp(y0 + (y1 - y0) * (x - x0) / (x1 - x0));
}

std::vector<double> poc_discrepancy(const LinearGaussianModel& model, const PathBundle& path,
                                    long N, int level, std::uint64_t seed,
                                    bool force_equal_gains) {
  if (level > path.level_gen) {
    throw LevelMismatch("level " + std::to_string(level) + " exceeds path level " +
                        std::to_string(path.level_gen));
  }
  const NoiseStream stream(seed, kSingleLevelTag, level);
  const Eigen::MatrixXd dY = path.increments_at(level);
  const long steps = dY.cols();
  const long per_unit = steps_per_unit(level);
  std::vector<Eigen::MatrixXd> reference_P;
  if (!force_equal_gains) reference_P = riccati_sequence(model, level, steps);

  Ensemble xi = initial_ensemble(model, N, level, Variant::stochastic, stream);
  Ensemble zeta = xi;
  zeta.variant = Variant::iid;
  auto discrepancy = [&] {
    return (xi.particles - zeta.particles).colwise().squaredNorm().mean();
  };
  std::vector<double> out{discrepancy()};
  for (long k = 0; k < steps; ++k) {
    const StepNoise noise = draw_step_noise(model, stream, Variant::stochastic, level, k, N);
    const Eigen::VectorXd y = dY.col(k);
    const Eigen::MatrixXd P_iid = force_equal_gains ? kernels::sample_moments(xi.particles).P
                                                    : reference_P[static_cast<std::size_t>(k)];
    advance_ensemble(model, xi, y, noise.dW, noise.dV);
    advance_ensemble(model, zeta, y, noise.dW, noise.dV, &P_iid);
    if ((k + 1) % per_unit == 0) out.push_back(discrepancy());
  }
  return out;
}

PocResult poc_sweep(const SweepConfig& config, std::ostream& os) {
  config.validate();
  if (config.poc_N.size() < 4) throw ConfigError("poc sweep needs at least 4 values of N");
  const LinearGaussianModel model = load_model(config.model);
  const std::vector<Replicate> reps =
      make_replicates(model, config.T, config.poc_level, config.seed, config.repetitions);

  CsvWriter csv(os);
  csv.header({"N", "level", "T", "discrepancy", "stderr", "reps", "seed", "wall_ms"});
  PocResult result;
  std::vector<std::pair<double, double>> fit_points;
  for (long N : config.poc_N) {
    const auto start = std::chrono::steady_clock::now();
    PocRow row;
    row.N = N;
    row.level = config.poc_level;
    row.T = config.T;
    row.seed = config.seed;
    row.discrepancy = estimate_mse(reps, [&](const Replicate& rep) {
      return poc_discrepancy(model, rep.path, N, config.poc_level, rep.filter_seed).back();
    });
    row.wall_ms = elapsed_ms(start);
    csv.field(row.N).field(row.level).field(row.T).field(row.discrepancy.mse);
    csv.field(row.discrepancy.std_error).field(row.discrepancy.reps).field(row.seed);
    csv.field(row.wall_ms).end_row();
    csv.flush();
    fit_points.emplace_back(static_cast<double>(N), row.discrepancy.mse);
    result.rows.push_back(row);
  }
  result.fit = fit_rate(fit_points);
  return result;
}

}  // namespace mlenkbf
