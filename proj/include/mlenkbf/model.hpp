#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <json.hpp>

namespace mlenkbf {

// Raw model fields as supplied by a user or a config file:
//   dX = A X dt + R1^{1/2} dW,   dY = C X dt + R2^{1/2} dV,   X_0 ~ N(M0, P0).
struct ModelSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd C;
  Eigen::MatrixXd R1_sqrt;
  Eigen::MatrixXd R2_sqrt;
  Eigen::VectorXd M0;
  Eigen::MatrixXd P0;
};

struct ValidationOptions {
  // Frozen-signal experiments need R1^{1/2} = 0; everything else requires it
  // invertible.
  bool require_invertible_signal_noise = true;
};

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kSingularityThreshold = 1e-10;
inline constexpr double kPsdTolerance = 1e-10;

// Validated linear-Gaussian model with the derived matrices cached. Immutable;
// only validate_model() constructs one.
class LinearGaussianModel {
 public:
  int dx() const { return static_cast<int>(spec_.A.rows()); }
  int dy() const { return static_cast<int>(spec_.C.rows()); }

  const Eigen::MatrixXd& A() const { return spec_.A; }
  const Eigen::MatrixXd& C() const { return spec_.C; }
  const Eigen::MatrixXd& R1_sqrt() const { return spec_.R1_sqrt; }
  const Eigen::MatrixXd& R2_sqrt() const { return spec_.R2_sqrt; }
  const Eigen::VectorXd& M0() const { return spec_.M0; }
  const Eigen::MatrixXd& P0() const { return spec_.P0; }

  const Eigen::MatrixXd& R1() const { return R1_; }
  const Eigen::MatrixXd& R2() const { return R2_; }
  const Eigen::MatrixXd& R2_inv() const { return R2_inv_; }
  // S = C^T R2^{-1} C
  const Eigen::MatrixXd& S() const { return S_; }
  // C^T R2^{-1}, so that a gain is P * CtR2inv().
  const Eigen::MatrixXd& CtR2inv() const { return CtR2inv_; }
  // Symmetric PSD square root of P0 used to draw initial states.
  const Eigen::MatrixXd& P0_sqrt() const { return P0_sqrt_; }

  const ModelSpec& spec() const { return spec_; }

  bool operator==(const LinearGaussianModel& other) const;

 private:
  friend LinearGaussianModel validate_model(ModelSpec spec, ValidationOptions options);

  ModelSpec spec_;
  Eigen::MatrixXd R1_, R2_, R2_inv_, S_, CtR2inv_, P0_sqrt_;
};

// Checks dimensions, symmetry, invertibility and PSD-ness, then caches
// R1, R2, R2^{-1} and S. Throws DimensionMismatch, NotSymmetric, Singular, NotPSD.
LinearGaussianModel validate_model(ModelSpec spec, ValidationOptions options = {});

struct StabilityReport {
  double mu_A = 0.0;  // largest eigenvalue of Sym(A)
  int controllability_rank = 0;
  int observability_rank = 0;
  bool satisfies_assumptions = false;
};

StabilityReport stability_report(const LinearGaussianModel& model);

// Numerical rank with threshold 1e-10 * (largest singular value).
int numerical_rank(const Eigen::MatrixXd& M);

// Symmetric PSD square root through the symmetric eigendecomposition;
// negative eigenvalues are clamped to zero. Throws NotSymmetric.
Eigen::MatrixXd sym_psd_sqrt(const Eigen::MatrixXd& M);

// Random model with Gaussian entries: A and C scaled by dx^-1/2, A shifted so
// mu(A) <= -0.5, R1 = B1 B1^T / dx + 0.1 I, R2 = B2 B2^T / dy + I, and an
// N(6 * ones, I) initial law. Its Euler Riccati recursion is typically bounded from level 4.
LinearGaussianModel random_model(int dx, int dy, std::uint64_t seed);

// Scalar model used throughout the experiments: A=-1, C=1, R1_sqrt=0.5,
// R2_sqrt=2, X_0 ~ N(6, 1). The Euler Riccati recursion stays bounded from
// level 0 upwards, so every level of the telescoping sum is usable.
LinearGaussianModel scalar_ou_model();

nlohmann::json model_to_json(const LinearGaussianModel& model);
// Parses the JSON model schema and validates the result.
LinearGaussianModel model_from_json(const nlohmann::json& j);
nlohmann::json stability_to_json(const StabilityReport& report);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* name);

}  // namespace mlenkbf
