#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlenkbf/ensemble.hpp"
#include "mlenkbf/model.hpp"
#include "mlenkbf/multilevel.hpp"
#include "mlenkbf/path.hpp"

namespace mlenkbf {

// Where a sweep's model comes from: inline JSON, a model file, a random model
// or the scalar OU model.
struct ModelSource {
  enum class Kind { scalar_ou, random, inline_json, file } kind = Kind::scalar_ou;
  int dx = 1;
  int dy = 1;
  std::uint64_t seed = 0;
  nlohmann::json model;  // inline_json
  std::string path;      // file
};

LinearGaussianModel load_model(const ModelSource& source);

struct SweepConfig {
  ModelSource model;
  int T = 10;
  std::vector<std::string> variants{"EnKBF", "MLEnKBF"};
  std::vector<double> eps;  // ML points, and single-level points via l = floor(log2(1/eps))
  std::vector<int> levels;  // extra single-level points given by level
  double n_scale = 1.0;     // single-level N = ceil(n_scale * Delta_l^-2)
  double c0 = 1.0;
  long N_min = 2;
  int repetitions = 100;
  std::uint64_t seed = 1;
  int headroom = 2;
  bool mse_all_times = false;  // average the squared error over t = 0..T
  std::string output = "sweep.csv";
  std::string rates_output;  // default: output with "_rates" before the extension

  // poc_sweep
  std::vector<long> poc_N{8, 16, 32, 64, 128, 256, 512};
  int poc_level = 6;

  void validate() const;  // throws ConfigError
  std::string rates_path() const;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& config);
// Throws ConfigError for unreadable or malformed files.
SweepConfig load_sweep_config(const std::string& path);
// Human-readable description of the config keys, printed by the CLI's --help.
std::string sweep_config_schema();

// One repetition: a data realization and the filter seed used on it.
struct Replicate {
  int index = 0;
  std::uint64_t path_seed = 0;
  std::uint64_t filter_seed = 0;
  PathBundle path;
};

// Repetition r uses path seed (base xor r) and filter seed mix64(base xor r).
std::vector<Replicate> make_replicates(const LinearGaussianModel& model, int T, int level_gen,
                                       std::uint64_t base_seed, int repetitions);

struct MseEstimate {
  double mse = 0.0;
  double std_error = 0.0;  // sample std of the squared errors / sqrt(R)
  long reps = 0;
};

// Mean and standard error of per-repetition squared errors. Throws
// TooFewPoints for fewer than 2.
MseEstimate mse_from_errors(const std::vector<double>& squared_errors);

// Evaluates `squared_error` on every replicate (in parallel, one slot per
// replicate) and summarizes.
MseEstimate estimate_mse(const std::vector<Replicate>& replicates,
                         const std::function<double(const Replicate&)>& squared_error);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  long n_points = 0;
};

// Least squares of ln y on ln x. Throws TooFewPoints (fewer than 2 points or
// a single distinct x) and NonPositive.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

struct SweepRow {
  std::string variant;
  int dx = 0, dy = 0, T = 0;
  double eps = 0.0;  // NaN for level-specified single-level points
  int level = 0;
  int L = -1;  // multilevel only
  long N_total = 0;
  double cost_paper = 0.0, cost_actual = 0.0;
  MseEstimate mse;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

struct VariantRate {
  std::string variant;
  RateFit fit;  // ln cost_paper against ln mse
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<VariantRate> rates;
};

void write_sweep_header(std::ostream& os);
void write_sweep_row(std::ostream& os, const SweepRow& row);
void write_rates_csv(std::ostream& os, const std::vector<VariantRate>& rates);

// Runs every (variant, point) of the config, writing each row to `sweep_csv`
// as it completes, then fits one rate per variant. Variants with fewer than
// two points get no rate.
SweepResult cost_mse_sweep(const SweepConfig& config, std::ostream& sweep_csv);

// Largest of the per-variant minimum MSEs: the smallest accuracy both variants
// reach. Throws ConfigError if either variant has no rows.
double smallest_common_mse(const std::vector<SweepRow>& rows, const std::string& a,
                           const std::string& b);

// Cost of `variant` at the given MSE, by linear interpolation of ln cost_paper
// against ln mse between neighbouring sweep points (nearest segment outside the
// sampled range).
double cost_at_mse(const std::vector<SweepRow>& rows, const std::string& variant, double mse);

// Mean over particles of |xi^i_t - zeta^i_t|^2 between the interacting
// ensemble and the iid system on shared noise, at integer times 0..T.
std::vector<double> poc_discrepancy(const LinearGaussianModel& model, const PathBundle& path,
                                    long N, int level, std::uint64_t seed,
                                    bool force_equal_gains = false);

struct PocRow {
  long N = 0;
  int level = 0;
  int T = 0;
  MseEstimate discrepancy;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

struct PocResult {
  std::vector<PocRow> rows;
  RateFit fit;  // ln discrepancy against ln N
};

// CSV columns: N,level,T,discrepancy,stderr,reps,seed,wall_ms
PocResult poc_sweep(const SweepConfig& config, std::ostream& csv);

}  // namespace mlenkbf
