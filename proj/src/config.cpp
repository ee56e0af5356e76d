#include <algorithm>
#include <filesystem>
#include <fstream>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/harness.hpp"

namespace mlenkbf {
namespace {

using nlohmann::json;

ModelSource model_source_from_json(const json& j) {
  ModelSource src;
  if (j.is_string()) {
    if (j.get<std::string>() != "scalar_ou") {
      throw ConfigError("model string must be \"scalar_ou\", got \"" + j.get<std::string>() + "\"");
    }
    return src;
  }
  if (!j.is_object()) throw ConfigError("model must be a string or an object");
  if (j.contains("random")) {
    const json& r = j.at("random");
    src.kind = ModelSource::Kind::random;
    src.dx = r.value("dx", 1);
    src.dy = r.value("dy", src.dx);
    src.seed = r.value("seed", std::uint64_t{0});
  } else if (j.contains("file")) {
    src.kind = ModelSource::Kind::file;
    src.path = j.at("file").get<std::string>();
  } else {
    src.kind = ModelSource::Kind::inline_json;
    src.model = j;
  }
  return src;
}

json model_source_to_json(const ModelSource& src) {
  switch (src.kind) {
    case ModelSource::Kind::scalar_ou: return "scalar_ou";
    case ModelSource::Kind::random:
      return {{"random", {{"dx", src.dx}, {"dy", src.dy}, {"seed", src.seed}}}};
    case ModelSource::Kind::inline_json: return src.model;
    case ModelSource::Kind::file: return {{"file", src.path}};
  }
  return nullptr;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

LinearGaussianModel load_model(const ModelSource& source) {
  switch (source.kind) {
    case ModelSource::Kind::scalar_ou: return scalar_ou_model();
    case ModelSource::Kind::random: return random_model(source.dx, source.dy, source.seed);
    case ModelSource::Kind::inline_json: return model_from_json(source.model);
    case ModelSource::Kind::file: {
      const json j = read_json_file(source.path);
      return model_from_json(j.contains("model") ? j.at("model") : j);
    }
  }
  throw ConfigError("unknown model source");
}

void SweepConfig::validate() const {
  if (T < 1) throw ConfigError("T must be at least 1");
  if (repetitions < 2) throw ConfigError("repetitions must be at least 2");
  if (eps.empty() && levels.empty()) throw ConfigError("eps or levels must be non-empty");
  if (headroom < 1) throw ConfigError("headroom must be at least 1");
  if (!(n_scale > 0.0) || !(c0 > 0.0)) throw ConfigError("n_scale and c0 must be positive");
  if (N_min < 2) throw ConfigError("N_min must be at least 2");
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) throw BadEpsilon(e);
  }
  for (int l : levels) {
    if (l < 0) throw ConfigError("levels must be non-negative");
  }
  if (poc_level < 0) throw ConfigError("poc_level must be non-negative");
  for (long n : poc_N) {
    if (n < 2) throw TooFewParticles(n);
  }
}

std::string SweepConfig::rates_path() const {
  if (!rates_output.empty()) return rates_output;
  std::filesystem::path p(output);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (p.stem().string() + "_rates" + ext)).string();
}

SweepConfig sweep_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"model",  "T",          "variants",    "eps",   "levels",
                                "n_scale", "c0",        "N_min",       "repetitions",
                                "seed",   "headroom",   "mse_all_times", "output",
                                "rates_output", "poc_N", "poc_level"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  SweepConfig c;
  try {
    if (j.contains("model")) c.model = model_source_from_json(j.at("model"));
    c.T = j.value("T", c.T);
    c.variants = j.value("variants", c.variants);
    c.eps = j.value("eps", c.eps);
    c.levels = j.value("levels", c.levels);
    c.n_scale = j.value("n_scale", c.n_scale);
    c.c0 = j.value("c0", c.c0);
    c.N_min = j.value("N_min", c.N_min);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.seed = j.value("seed", c.seed);
    c.headroom = j.value("headroom", c.headroom);
    c.mse_all_times = j.value("mse_all_times", c.mse_all_times);
    c.output = j.value("output", c.output);
    c.rates_output = j.value("rates_output", c.rates_output);
    c.poc_N = j.value("poc_N", c.poc_N);
    c.poc_level = j.value("poc_level", c.poc_level);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  for (const auto& v : c.variants) {
    const std::string base = v.rfind("ML", 0) == 0 ? v.substr(2) : v;
    variant_from_string(base);
  }
  return c;
}

json sweep_config_to_json(const SweepConfig& c) {
  return {{"model", model_source_to_json(c.model)},
          {"T", c.T},
          {"variants", c.variants},
          {"eps", c.eps},
          {"levels", c.levels},
          {"n_scale", c.n_scale},
          {"c0", c.c0},
          {"N_min", c.N_min},
          {"repetitions", c.repetitions},
          {"seed", c.seed},
          {"headroom", c.headroom},
          {"mse_all_times", c.mse_all_times},
          {"output", c.output},
          {"rates_output", c.rates_output},
          {"poc_N", c.poc_N},
          {"poc_level", c.poc_level}};
}

SweepConfig load_sweep_config(const std::string& path) {
  SweepConfig c = sweep_config_from_json(read_json_file(path));
  if (c.model.kind == ModelSource::Kind::file &&
      std::filesystem::path(c.model.path).is_relative()) {
    c.model.path = (std::filesystem::path(path).parent_path() / c.model.path).string();
  }
  return c;
}

std::string sweep_config_schema() {
  return R"(Config file (JSON object; every key optional unless noted):
  model          "scalar_ou" | {"random": {"dx", "dy", "seed"}} | {"file": path}
                 | inline model {"A", "C", "R1_sqrt", "R2_sqrt", "M0", "P0"}
  T              final integer time (10)
  variants       subset of ["EnKBF", "DEnKBF", "MLEnKBF", "MLDEnKBF", "iid", "MLiid"]
  eps            target accuracies in (0,1); single-level points use
                 l = floor(log2(1/eps)), ML points use the allocation rule
  levels         extra single-level points by level
  n_scale        single-level N = ceil(n_scale * 4^l) (1.0)
  c0, N_min      allocation constant (1.0) and minimum sample size (2)
  repetitions    data realizations per point, >= 2 (100)
  seed           base seed (1); repetition r uses seed xor r
  headroom       reference level = finest level + headroom, >= 1 (2)
  mse_all_times  average the squared error over t = 0..T (false)
  output         sweep/poc CSV path ("sweep.csv")
  rates_output   rates CSV path (output with "_rates" suffix)
  poc_N          N grid for poc ([8,...,512]); poc_level (6)
filter additionally reads: variant, N, level, eps (ML variants), level_gen.
)";
}

}  // namespace mlenkbf
