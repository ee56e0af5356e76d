#include <gtest/gtest.h>

#include <random>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/model.hpp"
#include "support.hpp"

namespace mlenkbf {
namespace {

using testing::m1;

ModelSpec scalar_spec() {
  ModelSpec s;
  s.A = m1(-1.0);
  s.C = m1(1.0);
  s.R1_sqrt = m1(1.0);
  s.R2_sqrt = m1(1.0);
  s.M0 = Eigen::VectorXd::Zero(1);
  s.P0 = m1(1.0);
  return s;
}

ModelSpec identity_spec(int d) {
  ModelSpec s;
  s.A = -Eigen::MatrixXd::Identity(d, d);
  s.C = Eigen::MatrixXd::Identity(d, d);
  s.R1_sqrt = Eigen::MatrixXd::Identity(d, d);
  s.R2_sqrt = Eigen::MatrixXd::Identity(d, d);
  s.M0 = Eigen::VectorXd::Zero(d);
  s.P0 = Eigen::MatrixXd::Identity(d, d);
  return s;
}

TEST(ValidateModel, ScalarIdentityCase) {
  const LinearGaussianModel m = validate_model(scalar_spec());
  EXPECT_EQ(m.dx(), 1);
  EXPECT_EQ(m.dy(), 1);
  EXPECT_DOUBLE_EQ(m.S()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.R1()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.R2_inv()(0, 0), 1.0);
}

TEST(ValidateModel, NonSymmetricR2Named) {
  ModelSpec s = identity_spec(2);
  s.R2_sqrt << 1, 2, 0, 1;
  try {
    validate_model(s);
    FAIL() << "expected NotSymmetric";
  } catch (const NotSymmetric& e) {
    EXPECT_EQ(e.name(), "R2_sqrt");
  }
}

TEST(ValidateModel, SFromScaledObservationNoise) {
  ModelSpec s = identity_spec(2);
  s.R2_sqrt = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  const LinearGaussianModel m = validate_model(s);
  // C^T (R2_sqrt^2)^{-1} C by hand: I * diag(1/4, 1/4) * I.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = expected(1, 1) = 0.25;
  EXPECT_LE((m.S() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ValidateModel, ShapeErrors) {
  ModelSpec s = identity_spec(2);
  s.C = Eigen::MatrixXd::Identity(2, 3);
  EXPECT_THROW(validate_model(s), DimensionMismatch);
  s = identity_spec(2);
  s.M0 = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(validate_model(s), DimensionMismatch);
  s = identity_spec(2);
  s.R1_sqrt = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(validate_model(s), DimensionMismatch);
}

TEST(ValidateModel, SingularAndNotPsd) {
  ModelSpec s = identity_spec(2);
  s.R1_sqrt(1, 1) = 0.0;
  try {
    validate_model(s);
    FAIL() << "expected Singular";
  } catch (const Singular& e) {
    EXPECT_EQ(e.name(), "R1_sqrt");
  }
  s = identity_spec(2);
  s.R2_sqrt(0, 0) = 1e-12;
  EXPECT_THROW(validate_model(s), Singular);
  s = identity_spec(2);
  s.P0(1, 1) = -0.5;
  try {
    validate_model(s);
    FAIL() << "expected NotPSD";
  } catch (const NotPSD& e) {
    EXPECT_EQ(e.name(), "P0");
  }
}

TEST(ValidateModel, ZeroSignalNoiseNeedsOptIn) {
  ModelSpec s = scalar_spec();
  s.R1_sqrt = m1(0.0);
  EXPECT_THROW(validate_model(s), Singular);
  ValidationOptions opt;
  opt.require_invertible_signal_noise = false;
  EXPECT_NO_THROW(validate_model(s, opt));
}

TEST(ValidateModel, Idempotent) {
  const LinearGaussianModel m = random_model(3, 2, 11);
  const LinearGaussianModel again = validate_model(m.spec());
  EXPECT_TRUE(again == m);
}

TEST(StabilityReport, NegativeIdentity) {
  const StabilityReport r = stability_report(validate_model(identity_spec(2)));
  EXPECT_DOUBLE_EQ(r.mu_A, -1.0);
  EXPECT_EQ(r.controllability_rank, 2);
  EXPECT_EQ(r.observability_rank, 2);
  EXPECT_TRUE(r.satisfies_assumptions);
}

TEST(StabilityReport, RotationIsNotStable) {
  ModelSpec s = identity_spec(2);
  s.A << 0, 1, -1, 0;
  const StabilityReport r = stability_report(validate_model(s));
  EXPECT_NEAR(r.mu_A, 0.0, 1e-15);
  EXPECT_FALSE(r.satisfies_assumptions);
}

TEST(StabilityReport, FullRankSignalNoiseIsControllable) {
  ModelSpec s = identity_spec(2);
  s.A << 3, -2, 7, 0.5;
  EXPECT_EQ(stability_report(validate_model(s)).controllability_rank, 2);
}

TEST(StabilityReport, PartialObservation) {
  ModelSpec s = identity_spec(2);
  s.C = Eigen::MatrixXd(1, 2);
  s.C << 1, 0;
  s.R2_sqrt = m1(1.0);
  // A diagonal: the second coordinate never shows up in C A^k.
  EXPECT_EQ(stability_report(validate_model(s)).observability_rank, 1);
  s.A << -1, 1, 0, -1;
  EXPECT_EQ(stability_report(validate_model(s)).observability_rank, 2);
}

TEST(RandomModel, Deterministic) {
  EXPECT_TRUE(random_model(1, 1, 7) == random_model(1, 1, 7));
  EXPECT_FALSE(random_model(2, 2, 7) == random_model(2, 2, 8));
}

TEST(RandomModel, Shapes) {
  const LinearGaussianModel m = random_model(3, 2, 1);
  EXPECT_EQ(m.C().rows(), 2);
  EXPECT_EQ(m.C().cols(), 3);
  EXPECT_EQ(m.R2_sqrt().rows(), 2);
  EXPECT_TRUE(m.M0().isApproxToConstant(6.0));
  EXPECT_TRUE(m.P0().isIdentity());
}

TEST(RandomModel, AlwaysSatisfiesAssumptions) {
  for (int d : {1, 2, 4, 25}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const LinearGaussianModel m = random_model(d, d, seed);
      EXPECT_TRUE(stability_report(m).satisfies_assumptions) << "d=" << d << " seed=" << seed;
      EXPECT_LE(stability_report(m).mu_A, -0.5 + 1e-12);
      EXPECT_TRUE(validate_model(m.spec()) == m);
    }
  }
}

TEST(SymPsdSqrt, SimpleCases) {
  EXPECT_TRUE(sym_psd_sqrt(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 4;
  D(1, 1) = 9;
  const Eigen::MatrixXd Q = sym_psd_sqrt(D);
  EXPECT_NEAR(Q(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(Q(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(Q(0, 1), 0.0, 1e-14);
}

TEST(SymPsdSqrt, ReconstructsRandomGram) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd B(3, 3);
    for (int i = 0; i < 9; ++i) B.data()[i] = nd(rng);
    const Eigen::MatrixXd M = B * B.transpose();
    const Eigen::MatrixXd Q = sym_psd_sqrt(M);
    EXPECT_EQ((Q - Q.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((Q * Q - M).norm(), 1e-8 * (1.0 + M.norm()));
    // Round trip the other way: the root of Q^2 is Q.
    const Eigen::MatrixXd Q2 = sym_psd_sqrt(Q * Q);
    EXPECT_LE((Q2 - Q).norm(), 1e-8 * Q.norm());
  }
}

TEST(SymPsdSqrt, ClampsRoundoffNegatives) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
  M(0, 0) = 1.0;
  M(1, 1) = -1e-15;
  const Eigen::MatrixXd Q = sym_psd_sqrt(M);
  EXPECT_TRUE(Q.allFinite());
  EXPECT_NEAR(Q(1, 1), 0.0, 1e-15);
}

TEST(SymPsdSqrt, RejectsNonSymmetric) {
  Eigen::MatrixXd M(2, 2);
  M << 1, 2, 0, 1;
  EXPECT_THROW(sym_psd_sqrt(M), NotSymmetric);
}

TEST(ModelJson, RoundTrip) {
  const LinearGaussianModel m = random_model(3, 2, 5);
  const nlohmann::json j = model_to_json(m);
  EXPECT_EQ(j["d_x"], 3);
  EXPECT_EQ(j["d_y"], 2);
  EXPECT_TRUE(model_from_json(j) == m);
}

TEST(ModelJson, MissingKeyAndMismatchedDims) {
  nlohmann::json j = model_to_json(scalar_ou_model());
  j.erase("P0");
  EXPECT_THROW(model_from_json(j), ConfigError);
  j = model_to_json(scalar_ou_model());
  j["d_x"] = 2;
  EXPECT_THROW(model_from_json(j), DimensionMismatch);
}

TEST(ScalarOuModel, SatisfiesAssumptions) {
  const LinearGaussianModel m = scalar_ou_model();
  EXPECT_TRUE(stability_report(m).satisfies_assumptions);
  EXPECT_DOUBLE_EQ(m.S()(0, 0), 0.25);
}

}  // namespace
}  // namespace mlenkbf
