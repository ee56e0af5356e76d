#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mlenkbf/kernels.hpp"
#include "mlenkbf/model.hpp"
#include "mlenkbf/noise.hpp"
#include "mlenkbf/path.hpp"
#include "mlenkbf/reference.hpp"
#include "mlenkbf/run_record.hpp"

namespace mlenkbf {

enum class Variant {
  stochastic,     // perturbed-observation EnKBF
  deterministic,  // innovation dY - (C xi + C m) dt / 2, no V noise
  iid,            // gain from the level's discretized Riccati covariance
  collapsed,      // xi' = B xi + U dY + alpha omega
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

// One level's particle block; column i is xi^i at time step*Delta_level.
struct Ensemble {
  int level = 0;
  long step = 0;
  Eigen::MatrixXd particles;
  Variant variant = Variant::stochastic;

  long size() const { return static_cast<long>(particles.cols()); }
  int dim() const { return static_cast<int>(particles.rows()); }
};

// xi_0^i = M0 + P0^{1/2} z_i with z_i from the stream's initial role at
// coordinate i, so enlarging N extends the ensemble rather than redrawing it.
// Positions are snapped to the noise grid.
Ensemble initial_ensemble(const LinearGaussianModel& model, long N, int level, Variant variant,
                          const NoiseStream& stream);

// Throws TooFewParticles for N < 2.
SampleMoments sample_moments(const Ensemble& ensemble);

// U = P C^T R2^{-1}
Eigen::MatrixXd kalman_gain(const LinearGaussianModel& model, const Eigen::MatrixXd& P);
StepCoefficients step_coefficients(const LinearGaussianModel& model, const Eigen::MatrixXd& P,
                                   double dt);

// Advances one step with noise already drawn (dW: d_x x N, dV: d_y x N; dV is
// ignored by the deterministic variant). The gain comes from the pre-step
// sample covariance unless `gain_covariance` is given; the iid variant
// requires it. Not valid for the collapsed variant.
void advance_ensemble(const LinearGaussianModel& model, Ensemble& ensemble,
                      const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                      const Eigen::MatrixXd& dV, const Eigen::MatrixXd* gain_covariance = nullptr);

// Draws this step's level increments for every particle from the stream.
struct StepNoise {
  Eigen::MatrixXd dW;
  Eigen::MatrixXd dV;  // empty for the deterministic variant
};
StepNoise draw_step_noise(const LinearGaussianModel& model, const NoiseStream& stream,
                          Variant variant, int level, long step, long N);

Ensemble enkbf_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                    const Eigen::VectorXd& dY, const NoiseStream& stream);
Ensemble denkbf_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                     const Eigen::VectorXd& dY, const NoiseStream& stream);
// Uses the deterministic gain of `reference` and the same noise coordinates as
// enkbf_step. Throws LevelMismatch when the reference is at another level or step.
Ensemble iid_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                  const Eigen::VectorXd& dY, const ReferenceState& reference,
                  const NoiseStream& stream);
Ensemble collapsed_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                        const Eigen::VectorXd& dY, const NoiseStream& stream);

// Residuals (max abs entry) between the stepped collapsed ensemble's moments
// and the closed-form mean and covariance recursions.
struct RecursionCheck {
  double mean_residual = 0.0;
  double cov_residual = 0.0;
  Ensemble next;
};
RecursionCheck recursion_check(const LinearGaussianModel& model, const Ensemble& ensemble,
                               const Eigen::VectorXd& dY, const NoiseStream& stream);
// Same with the omega draws supplied (d_x x N).
RecursionCheck recursion_check(const LinearGaussianModel& model, const Ensemble& ensemble,
                               const Eigen::VectorXd& dY, const Eigen::MatrixXd& omega);

// Runs one variant at `level` over the whole path; the estimate is the
// ensemble mean at integer times. cost = N * Delta_level^{-1} * T.
RunRecord run_single_level(const LinearGaussianModel& model, const PathBundle& path, long N,
                           int level, Variant variant, std::uint64_t seed);

// Stream tag used by run_single_level (and by level 0 of the multilevel estimator).
inline constexpr std::uint32_t kSingleLevelTag = 0;

}  // namespace mlenkbf
