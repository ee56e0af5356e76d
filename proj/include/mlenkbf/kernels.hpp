#pragma once

#include <Eigen/Dense>

#include "mlenkbf/model.hpp"

namespace mlenkbf {

// Sample mean and unbiased (1/(N-1)) sample covariance of an ensemble.
struct SampleMoments {
  Eigen::VectorXd m;
  Eigen::MatrixXd P;
};

// Coefficients of the collapsed-noise form xi' = B xi + U dY + alpha omega:
//   B = I + A dt - P S dt,  U = P C^T R2^{-1},  alpha = (R1 + P S P)^{1/2} dt^{1/2}.
struct StepCoefficients {
  Eigen::MatrixXd B;
  Eigen::MatrixXd U;
  Eigen::MatrixXd alpha;
};

// Particle kernels. Particles are the columns of a d_x x N matrix and are
// updated in place. The kernels:: versions split the columns into fixed-width
// chunks processed in parallel; moments are reduced over chunk partials with a
// fixed pairwise tree, so every result is independent of the thread count.
namespace kernels {

Eigen::VectorXd column_mean(const Eigen::MatrixXd& particles);
SampleMoments sample_moments(const Eigen::MatrixXd& particles);

// xi' = xi + A xi dt + R1^{1/2} dW + U (dY - [C xi dt + R2^{1/2} dV])
void stochastic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain, double dt,
                       const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                       const Eigen::MatrixXd& dV, Eigen::MatrixXd& particles);

// xi' = xi + A xi dt + R1^{1/2} dW + U (dY - (C xi + C m) dt / 2)
void deterministic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain,
                          const Eigen::VectorXd& mean, double dt, const Eigen::VectorXd& dY,
                          const Eigen::MatrixXd& dW, Eigen::MatrixXd& particles);

// xi' = B xi + U dY + alpha omega
void collapsed_update(const StepCoefficients& coef, const Eigen::VectorXd& dY,
                      const Eigen::MatrixXd& omega, Eigen::MatrixXd& particles);

}  // namespace kernels

// Straight loop-nest versions of the same kernels, one particle and one
// component at a time. Kept as the reference the parallel kernels are tested
// and benchmarked against.
namespace serial {

Eigen::VectorXd column_mean(const Eigen::MatrixXd& particles);
SampleMoments sample_moments(const Eigen::MatrixXd& particles);

void stochastic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain, double dt,
                       const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                       const Eigen::MatrixXd& dV, Eigen::MatrixXd& particles);

void deterministic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain,
                          const Eigen::VectorXd& mean, double dt, const Eigen::VectorXd& dY,
                          const Eigen::MatrixXd& dW, Eigen::MatrixXd& particles);

void collapsed_update(const StepCoefficients& coef, const Eigen::VectorXd& dY,
                      const Eigen::MatrixXd& omega, Eigen::MatrixXd& particles);

}  // namespace serial

}  // namespace mlenkbf
