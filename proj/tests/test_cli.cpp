#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlenkbf/cli.hpp"
#include "mlenkbf/diagnostics.hpp"
#include "mlenkbf/parallel.hpp"
#include "support.hpp"

namespace mlenkbf {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "mlenkbf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  set_quiet(false);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_wall_clock(const std::string& csv) {
  return testing::drop_column(csv, "wall_ms");
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mlenkbf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    threads_ = max_threads();
  }
  void TearDown() override {
    set_threads(threads_);
    fs::remove_all(dir_);
  }

  std::string write_json(const std::string& name, const nlohmann::json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  int threads_ = 1;
};

TEST_F(Cli, PlanPrintsAllocation) {
  const CliResult r = run({"plan", "--eps", "0.125"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["N"], nlohmann::json({134, 67, 34, 17}));
  EXPECT_EQ(j["L"], 3);
  EXPECT_EQ(run({"plan", "--eps", "1.5"}).code, 2);
}

TEST_F(Cli, ValidateStableModel) {
  const std::string model = write_json(
      "model.json", {{"A", {{-1.0, 0.0}, {0.0, -1.0}}},
                     {"C", {{1.0, 0.0}, {0.0, 1.0}}},
                     {"R1_sqrt", {{1.0, 0.0}, {0.0, 1.0}}},
                     {"R2_sqrt", {{1.0, 0.0}, {0.0, 1.0}}},
                     {"M0", {0.0, 0.0}},
                     {"P0", {{1.0, 0.0}, {0.0, 1.0}}}});
  const CliResult r = run({"--config", model, "validate"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.dump().find("true") != std::string::npos) << r.out;
}

TEST_F(Cli, MissingConfigIsUsageError) {
  const std::string missing = path("nope.json");
  const CliResult r = run({"--config", missing, "sweep"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_EQ(run({"sweep"}).code, 1);
  EXPECT_EQ(run({"filter"}).code, 1);
}

TEST_F(Cli, BadFlags) {
  EXPECT_EQ(run({"--frobnicate", "plan", "--eps", "0.5"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--threads", "-2", "plan", "--eps", "0.5"}).code, 1);
}

TEST_F(Cli, Version) {
  const CliResult r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(r.out.empty());
}

TEST_F(Cli, SimulateWritesPath) {
  const CliResult r = run({"--seed", "3", "simulate", "--T", "2", "--level", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "step,t,truth_0,dY_0");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 8);
  EXPECT_EQ(run({"--seed", "3", "simulate", "--T", "2", "--level", "2"}).out, r.out);
  EXPECT_NE(run({"--seed", "4", "simulate", "--T", "2", "--level", "2"}).out, r.out);
}

TEST_F(Cli, FilterRuns) {
  for (const char* variant : {"EnKBF", "DEnKBF", "MLEnKBF", "MLDEnKBF"}) {
    const std::string cfg = write_json(std::string(variant) + ".json",
                                       {{"variant", variant}, {"N", 20}, {"level", 3}, {"T", 2},
                                        {"eps", {0.25}}});
    const CliResult r = run({"--config", cfg, "--seed", "2", "filter"});
    ASSERT_EQ(r.code, 0) << variant << ": " << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find(',')), "variant");
    EXPECT_NE(r.err.find("squared error"), std::string::npos);
    EXPECT_EQ(strip_wall_clock(run({"--config", cfg, "--seed", "2", "--quiet", "filter"}).out),
              strip_wall_clock(r.out));
  }
}

TEST_F(Cli, SweepAndPoc) {
  const std::string cfg = write_json(
      "sweep.json", {{"T", 1},
                     {"variants", {"EnKBF", "MLEnKBF"}},
                     {"eps", {0.5, 0.25}},
                     {"n_scale", 0.25},
                     {"repetitions", 4},
                     {"output", path("sweep.csv")},
                     {"poc_N", {4, 8, 16, 32}},
                     {"poc_level", 2}});
  CliResult r = run({"--config", cfg, "sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("sweep.csv")));
  EXPECT_TRUE(fs::exists(path("sweep_rates.csv")));
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "variant,slope,intercept,r2,n_points");

  r = run({"--config", cfg, "--out", path("poc.csv"), "poc"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("poc.csv")).substr(0, 2), "N,");
  EXPECT_TRUE(fs::exists(path("poc_rates.csv")));
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
  const std::string cfg = write_json("sweep.json", {{"T", 1},
                                                    {"variants", {"EnKBF", "MLDEnKBF"}},
                                                    {"eps", {0.5, 0.25}},
                                                    {"repetitions", 4}});
  ASSERT_EQ(run({"--config", cfg, "--threads", "1", "--out", path("a.csv"), "sweep"}).code, 0);
  ASSERT_EQ(run({"--config", cfg, "--threads", "3", "--out", path("b.csv"), "sweep"}).code, 0);
  EXPECT_EQ(strip_wall_clock(slurp(path("a.csv"))), strip_wall_clock(slurp(path("b.csv"))));
  EXPECT_EQ(slurp(path("a_rates.csv")), slurp(path("b_rates.csv")));
  ASSERT_EQ(run({"--config", cfg, "--seed", "9", "--out", path("c.csv"), "sweep"}).code, 0);
  EXPECT_NE(strip_wall_clock(slurp(path("a.csv"))), strip_wall_clock(slurp(path("c.csv"))));
}

TEST_F(Cli, MalformedConfigIsRuntimeError) {
  const std::string p = path("bad.json");
  std::ofstream(p) << "{ not json";
  EXPECT_EQ(run({"--config", p, "sweep"}).code, 2);
  const std::string unknown = write_json("unknown.json", {{"repetitons", 3}});
  const CliResult r = run({"--config", unknown, "sweep"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("repetitons"), std::string::npos);
}

}  // namespace
}  // namespace mlenkbf
