#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mlenkbf/ensemble.hpp"

namespace mlenkbf {

// Fine (level l) and coarse (level l-1) ensembles driven by the same Brownian
// increments and started from the same particles.
struct CoupledPair {
  Ensemble fine;
  Ensemble coarse;
  Variant variant = Variant::stochastic;

  int level() const { return fine.level; }
  long size() const { return fine.size(); }
  // (1/N) sum_i (xi^{i,l} - xi^{i,l-1})
  Eigen::VectorXd mean_difference() const;
};

// Both legs start from the stream's initial draws; the stream must have
// finest level `level`. Throws LevelMismatch for level < 1.
CoupledPair make_coupled_pair(const LinearGaussianModel& model, long N, int level,
                              Variant variant, const NoiseStream& stream);

// Reference covariances for the iid variant: P at fine steps 2k and 2k+1 and
// at coarse step k.
struct PairGains {
  const Eigen::MatrixXd* fine0 = nullptr;
  const Eigen::MatrixXd* fine1 = nullptr;
  const Eigen::MatrixXd* coarse = nullptr;
};

// Two fine substeps with dY0, dY1 and one coarse step with dY0 + dY1. The
// coarse noise is the sum of the two fine draws. Each leg's gain comes from
// its own ensemble unless `gains` is given.
void coupled_pair_step(const LinearGaussianModel& model, CoupledPair& pair,
                       const Eigen::VectorXd& dY0, const Eigen::VectorXd& dY1,
                       const NoiseStream& stream, const PairGains* gains = nullptr);

// Per-integer-time mean difference of a coupled pair at level l >= 1, with
// stream tag l. cost_paper = N * Delta_l^{-1} * T; cost_actual adds the
// coarse leg.
RunRecord run_coupled_level(const LinearGaussianModel& model, const PathBundle& path, long N,
                            int level, Variant variant, std::uint64_t seed);

struct LevelPlan {
  double eps = 0.0;
  double c0 = 1.0;
  int L = 0;
  std::vector<long> N;  // N_0..N_L
  double cost = 0.0;    // sum_l N_l / Delta_l, per unit time

  double cost_actual() const;  // N_0 + sum_{l>=1} 1.5 N_l / Delta_l, per unit time
  long total_particles() const;
};

// L = floor(log2(1/eps)); N_l = max(N_min, ceil(c0 eps^-2 Delta_l |ln eps|)).
// Throws BadEpsilon unless 0 < eps < 1.
LevelPlan plan_allocation(double eps, double c0 = 1.0, long N_min = 2);

nlohmann::json plan_to_json(const LevelPlan& plan);

// Level 0 single-level term plus the coupled differences of levels 1..L, each
// level on its own stream tag. The iid variant uses each level's discretized
// Riccati covariances for the gains. Throws PlanPathMismatch unless
// L + headroom <= path.level_gen.
RunRecord ml_estimate(const LinearGaussianModel& model, const PathBundle& path,
                      const LevelPlan& plan, Variant variant, std::uint64_t seed,
                      int headroom = 2);

// Names used in result tables.
std::string ml_variant_name(Variant variant);

}  // namespace mlenkbf
