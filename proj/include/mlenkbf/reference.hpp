#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "mlenkbf/model.hpp"
#include "mlenkbf/path.hpp"

namespace mlenkbf {

// Discretized conditional mean and covariance at time step*Delta_level.
struct ReferenceState {
  int level = 0;
  long step = 0;
  Eigen::VectorXd m;
  Eigen::MatrixXd P;
};

// Ricc(P) = A P + P A^T - P S P + R1
Eigen::MatrixXd ricc_drift(const LinearGaussianModel& model, const Eigen::MatrixXd& P);
// SRicc(P) = (A - P S) P (A^T - S P)
Eigen::MatrixXd sricc_drift(const LinearGaussianModel& model, const Eigen::MatrixXd& P);

// P' = P + Ricc(P) dt + SRicc(P) dt^2, step + 1. Warns when P' has an
// eigenvalue below -1e-8: the covariance bound the analysis assumes is breaking.
ReferenceState riccati_step(const LinearGaussianModel& model, const ReferenceState& state);

// m' = m + A m dt + U (dY - C m dt), U = P C^T R2^{-1} at the current P.
// Only m changes. Throws DimensionMismatch.
ReferenceState kbf_mean_step(const LinearGaussianModel& model, const ReferenceState& state,
                             const Eigen::VectorXd& dY);

// Mean step followed by the Riccati step.
ReferenceState reference_step(const LinearGaussianModel& model, const ReferenceState& state,
                              const Eigen::VectorXd& dY);

inline constexpr double kRiccatiBreachTolerance = 1e-8;

struct ReferenceTrajectory {
  int level = 0;
  std::vector<ReferenceState> states;  // integer times 0..T
  long psd_breaches = 0;               // steps where P had an eigenvalue < -1e-8
};

// Runs the recursion pair over the level-`level` aggregated increments of the
// path, starting from (M0, P0). Throws LevelMismatch when level > level_gen.
ReferenceTrajectory run_reference(const LinearGaussianModel& model, const PathBundle& path,
                                  int level);

// P_{k Delta_l} for k = 0..steps (data independent).
std::vector<Eigen::MatrixXd> riccati_sequence(const LinearGaussianModel& model, int level,
                                              long steps);

// CSV columns: t,m_0..,P_ij over the upper triangle (row-major).
void write_reference_csv(std::ostream& os, const ReferenceTrajectory& trajectory);

}  // namespace mlenkbf
