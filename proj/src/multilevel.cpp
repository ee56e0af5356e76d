#include "mlenkbf/multilevel.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/kernels.hpp"

namespace mlenkbf {

Eigen::VectorXd CoupledPair::mean_difference() const {
  return kernels::column_mean(fine.particles) - kernels::column_mean(coarse.particles);
}

CoupledPair make_coupled_pair(const LinearGaussianModel& model, long N, int level,
                              Variant variant, const NoiseStream& stream) {
  if (level < 1) throw LevelMismatch("a coupled pair needs level >= 1");
  if (variant == Variant::collapsed) throw Error("collapsed variant cannot be coupled");
  CoupledPair pair;
  pair.variant = variant;
  pair.fine = initial_ensemble(model, N, level, variant, stream);
  pair.coarse = pair.fine;
  pair.coarse.level = level - 1;
  return pair;
}

void coupled_pair_step(const LinearGaussianModel& model, CoupledPair& pair,
                       const Eigen::VectorXd& dY0, const Eigen::VectorXd& dY1,
                       const NoiseStream& stream, const PairGains* gains) {
  const long N = pair.size();
  const int l = pair.level();
  const long k = pair.coarse.step;
  if (pair.fine.step != 2 * k) throw LevelMismatch("coupled legs are not time-aligned");

  const StepNoise first = draw_step_noise(model, stream, pair.variant, l, 2 * k, N);
  const StepNoise second = draw_step_noise(model, stream, pair.variant, l, 2 * k + 1, N);
  advance_ensemble(model, pair.fine, dY0, first.dW, first.dV, gains ? gains->fine0 : nullptr);
  advance_ensemble(model, pair.fine, dY1, second.dW, second.dV, gains ? gains->fine1 : nullptr);

  // Fine draws live on a dyadic grid, so these sums equal the stream's
  // coarse increments bit for bit.
  const Eigen::MatrixXd dW = first.dW + second.dW;
  const Eigen::MatrixXd dV = first.dV + second.dV;
  const Eigen::VectorXd dY = dY0 + dY1;
  advance_ensemble(model, pair.coarse, dY, dW, dV, gains ? gains->coarse : nullptr);
}

RunRecord run_coupled_level(const LinearGaussianModel& model, const PathBundle& path, long N,
                            int level, Variant variant, std::uint64_t seed) {
  if (level < 1 || level > path.level_gen) {
    throw LevelMismatch("coupled level " + std::to_string(level) + " outside 1.." +
                        std::to_string(path.level_gen));
  }
  const auto start = std::chrono::steady_clock::now();
  const NoiseStream stream(seed, static_cast<std::uint32_t>(level), level);
  const Eigen::MatrixXd dY = path.increments_at(level);
  const long coarse_steps = dY.cols() / 2;
  const long coarse_per_unit = steps_per_unit(level - 1);

  std::vector<Eigen::MatrixXd> fine_P, coarse_P;
  if (variant == Variant::iid) {
    fine_P = riccati_sequence(model, level, dY.cols());
    coarse_P = riccati_sequence(model, level - 1, coarse_steps);
  }

  CoupledPair pair = make_coupled_pair(model, N, level, variant, stream);
  RunRecord record;
  record.variant = std::string(to_string(variant));
  record.level = level;
  record.N = {N};
  record.seed = seed;
  record.estimate.push_back(pair.mean_difference());

  for (long k = 0; k < coarse_steps; ++k) {
    PairGains gains;
    if (variant == Variant::iid) {
      gains.fine0 = &fine_P[static_cast<std::size_t>(2 * k)];
      gains.fine1 = &fine_P[static_cast<std::size_t>(2 * k + 1)];
      gains.coarse = &coarse_P[static_cast<std::size_t>(k)];
    }
    coupled_pair_step(model, pair, dY.col(2 * k), dY.col(2 * k + 1), stream,
                      variant == Variant::iid ? &gains : nullptr);
    if ((k + 1) % coarse_per_unit == 0) record.estimate.push_back(pair.mean_difference());
  }

  const double per_unit = static_cast<double>(steps_per_unit(level));
  record.cost_paper = static_cast<double>(N) * per_unit * path.T;
  record.cost_actual = 1.5 * record.cost_paper;
  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

double LevelPlan::cost_actual() const {
  double c = N.empty() ? 0.0 : static_cast<double>(N[0]);
  for (std::size_t l = 1; l < N.size(); ++l) {
    c += 1.5 * static_cast<double>(N[l]) * std::ldexp(1.0, static_cast<int>(l));
  }
  return c;
}

long LevelPlan::total_particles() const { return std::accumulate(N.begin(), N.end(), 0L); }

LevelPlan plan_allocation(double eps, double c0, long N_min) {
  if (!(eps > 0.0 && eps < 1.0)) throw BadEpsilon(eps);
  if (!(c0 > 0.0)) throw ConfigError("c0 must be positive");
  LevelPlan plan;
  plan.eps = eps;
  plan.c0 = c0;
  // log2 keeps exact powers of two exact.
  plan.L = static_cast<int>(std::floor(-std::log2(eps)));
  const double scale = c0 * std::abs(std::log(eps)) / (eps * eps);
  for (int l = 0; l <= plan.L; ++l) {
    const long n = static_cast<long>(std::ceil(scale * step_size(l)));
    plan.N.push_back(std::max(N_min, n));
    plan.cost += static_cast<double>(plan.N.back()) * std::ldexp(1.0, l);
  }
  return plan;
}

nlohmann::json plan_to_json(const LevelPlan& plan) {
  return {{"eps", plan.eps}, {"c0", plan.c0}, {"L", plan.L}, {"N", plan.N}, {"cost", plan.cost}};
}

std::string ml_variant_name(Variant variant) { return "ML" + std::string(to_string(variant)); }

RunRecord ml_estimate(const LinearGaussianModel& model, const PathBundle& path,
                      const LevelPlan& plan, Variant variant, std::uint64_t seed, int headroom) {
  if (plan.L + headroom > path.level_gen) {
    throw PlanPathMismatch("plan needs level " + std::to_string(plan.L + headroom) +
                           " but the path is generated at level " +
                           std::to_string(path.level_gen));
  }
  if (plan.N.size() != static_cast<std::size_t>(plan.L) + 1) {
    throw PlanPathMismatch("plan has " + std::to_string(plan.N.size()) + " sample sizes for L=" +
                           std::to_string(plan.L));
  }
  const auto start = std::chrono::steady_clock::now();
  RunRecord record = run_single_level(model, path, plan.N[0], 0, variant, seed);
  for (int l = 1; l <= plan.L; ++l) {
    const RunRecord diff =
        run_coupled_level(model, path, plan.N[static_cast<std::size_t>(l)], l, variant, seed);
    for (std::size_t t = 0; t < record.estimate.size(); ++t) record.estimate[t] += diff.estimate[t];
  }
  record.variant = ml_variant_name(variant);
  record.level = plan.L;
  record.L = plan.L;
  record.eps = plan.eps;
  record.N = plan.N;
  record.cost_paper = plan.cost * path.T;
  record.cost_actual = plan.cost_actual() * path.T;
  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace mlenkbf
