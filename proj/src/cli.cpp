#include "mlenkbf/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlenkbf/diagnostics.hpp"
#include "mlenkbf/errors.hpp"
#include "mlenkbf/harness.hpp"
#include "mlenkbf/multilevel.hpp"
#include "mlenkbf/parallel.hpp"
#include "mlenkbf/reference.hpp"

#ifndef MLENKBF_VERSION
#define MLENKBF_VERSION "mlenkbf dev"
#endif

namespace mlenkbf {
namespace {

using nlohmann::json;

// Missing or unreadable inputs named on the command line: exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  bool quiet = false;
};

json read_config_json(const std::string& path) {
  if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

bool looks_like_model(const json& j) { return j.is_object() && j.contains("A"); }

// A config file is either a bare model or a sweep-style config with a model key.
LinearGaussianModel model_from_config(const GlobalOptions& g) {
  if (g.config.empty()) return scalar_ou_model();
  const json j = read_config_json(g.config);
  if (looks_like_model(j)) return model_from_json(j);
  return load_model(load_sweep_config(g.config).model);
}

SweepConfig sweep_config(const GlobalOptions& g, const char* command) {
  if (g.config.empty()) throw UsageError(std::string(command) + " requires --config");
  read_config_json(g.config);
  SweepConfig c = load_sweep_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) {
    c.output = g.out;
    c.rates_output.clear();
  }
  return c;
}

// Writes to --out when given, otherwise to `out`.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error("cannot write '" + path + "'");
  fn(file);
}

void run_validate(const GlobalOptions& g, std::ostream& out) {
  const LinearGaussianModel model = model_from_config(g);
  const json report = stability_to_json(stability_report(model));
  emit(g.out, out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
}

void run_simulate(const GlobalOptions& g, int T, int level, std::ostream& out) {
  const LinearGaussianModel model = model_from_config(g);
  const PathBundle path = generate_path(model, T, level, g.seed.value_or(1));
  emit(g.out, out, [&](std::ostream& os) { write_path_csv(os, path); });
}

void run_filter(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  if (g.config.empty()) throw UsageError("filter requires --config");
  json j = read_config_json(g.config);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string variant_name = j.value("variant", std::string("EnKBF"));
  const long N = j.value("N", 100L);
  const int level = j.value("level", 5);
  const int level_gen = j.value("level_gen", -1);
  const bool has_output = j.contains("output");
  for (const char* key : {"variant", "N", "level", "level_gen"}) j.erase(key);
  if (!j.contains("eps")) j["eps"] = json::array({0.5});
  SweepConfig c = sweep_config_from_json(j);
  if (g.seed) c.seed = *g.seed;
  const LinearGaussianModel model = load_model(c.model);

  const bool multilevel = variant_name.rfind("ML", 0) == 0;
  const Variant base = variant_from_string(multilevel ? variant_name.substr(2) : variant_name);
  std::optional<LevelPlan> plan;
  if (multilevel) plan = plan_allocation(c.eps.front(), c.c0, c.N_min);
  const int finest = multilevel ? plan->L : level;
  const int gen = level_gen >= 0 ? level_gen : finest + c.headroom;

  const PathBundle path = generate_path(model, c.T, gen, c.seed);
  const std::uint64_t filter_seed = mix64(c.seed);
  RunRecord record = multilevel ? ml_estimate(model, path, *plan, base, filter_seed,
                                              gen - plan->L)
                                : run_single_level(model, path, N, level, base, filter_seed);
  const ReferenceTrajectory ref = run_reference(model, path, gen);
  for (const auto& s : ref.states) record.reference.push_back(s.m);

  const std::string target = !g.out.empty() ? g.out : (has_output ? c.output : std::string());
  emit(target, out, [&](std::ostream& os) { write_run_csv(os, record); });
  if (!g.quiet) {
    err << variant_name << ": squared error at t=" << record.T() << " is "
        << record.squared_error_final() << '\n';
  }
}

void run_sweep(const GlobalOptions& g, std::ostream& out) {
  const SweepConfig c = sweep_config(g, "sweep");
  SweepResult result;
  {
    std::ofstream csv(c.output);
    if (!csv) throw Error("cannot write '" + c.output + "'");
    result = cost_mse_sweep(c, csv);
  }
  std::ofstream rates(c.rates_path());
  if (!rates) throw Error("cannot write '" + c.rates_path() + "'");
  write_rates_csv(rates, result.rates);
  write_rates_csv(out, result.rates);
}

void run_poc(const GlobalOptions& g, std::ostream& out) {
  const SweepConfig c = sweep_config(g, "poc");
  PocResult result;
  {
    std::ofstream csv(c.output);
    if (!csv) throw Error("cannot write '" + c.output + "'");
    result = poc_sweep(c, csv);
  }
  const std::vector<VariantRate> rates{{"poc", result.fit}};
  std::ofstream file(c.rates_path());
  if (!file) throw Error("cannot write '" + c.rates_path() + "'");
  write_rates_csv(file, rates);
  write_rates_csv(out, rates);
}

void run_plan(const GlobalOptions& g, double eps, double c0, long n_min, std::ostream& out) {
  const json j = plan_to_json(plan_allocation(eps, c0, n_min));
  emit(g.out, out, [&](std::ostream& os) { os << j.dump() << '\n'; });
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel ensemble Kalman-Bucy filters for linear-Gaussian models", "mlenkbf"};
  app.set_version_flag("--version", MLENKBF_VERSION);
  app.footer(sweep_config_schema());
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "JSON config or model file");
  auto* seed_opt = app.add_option("--seed", seed_value, "base seed");
  app.add_option("--out", g.out, "output path");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", g.quiet, "suppress diagnostics");

  auto* validate = app.add_subcommand("validate", "print the stability report of a model");
  int T = 10, level = 8;
  auto* simulate = app.add_subcommand("simulate", "generate a data path and dump it as CSV");
  simulate->add_option("--T", T, "final time")->check(CLI::PositiveNumber);
  simulate->add_option("--level", level, "generation level")->check(CLI::NonNegativeNumber);
  auto* filter = app.add_subcommand("filter", "run one configured filter");
  auto* sweep = app.add_subcommand("sweep", "cost-vs-MSE sweep");
  auto* poc = app.add_subcommand("poc", "interacting vs iid particle discrepancy sweep");
  double eps = 0.0, c0 = 1.0;
  long n_min = 2;
  auto* plan = app.add_subcommand("plan", "print the level allocation for a target eps");
  plan->add_option("--eps", eps, "target accuracy in (0,1)")->required();
  plan->add_option("--c0", c0, "allocation constant");
  plan->add_option("--nmin", n_min, "minimum sample size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;
  set_quiet(g.quiet);
  if (g.threads > 0) set_threads(g.threads);

  try {
    if (validate->parsed()) run_validate(g, out);
    if (simulate->parsed()) run_simulate(g, T, level, out);
    if (filter->parsed()) run_filter(g, out, err);
    if (sweep->parsed()) run_sweep(g, out);
    if (poc->parsed()) run_poc(g, out);
    if (plan->parsed()) run_plan(g, eps, c0, n_min, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mlenkbf
