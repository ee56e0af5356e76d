#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mlenkbf/diagnostics.hpp"
#include "mlenkbf/errors.hpp"
#include "mlenkbf/harness.hpp"
#include "mlenkbf/reference.hpp"
#include "support.hpp"

namespace mlenkbf {
namespace {

using testing::m1;
using testing::scalar_model;

// A = 0, S = 1 (C = 1, R2 = 1), R1 = 1.
LinearGaussianModel unit_model() { return scalar_model(0.0, 1.0, 1.0, 1.0); }

ReferenceState state_at(int level, double m, double P) {
  return ReferenceState{level, 0, Eigen::VectorXd::Constant(1, m), m1(P)};
}

TEST(RiccDrift, ScalarHandValues) {
  const LinearGaussianModel m = unit_model();
  // Ricc = 0 + 0 - 1 + 1, SRicc = (0 - 1) * 1 * (0 - 1).
  EXPECT_DOUBLE_EQ(ricc_drift(m, m1(1.0))(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(sricc_drift(m, m1(1.0))(0, 0), 1.0);
}

TEST(RiccDrift, ZeroCase) {
  const LinearGaussianModel m = scalar_model(-0.7, 1.0, 0.0, 1.0);
  EXPECT_EQ(ricc_drift(m, m1(0.0))(0, 0), 0.0);
  EXPECT_EQ(sricc_drift(m, m1(0.0))(0, 0), 0.0);
}

TEST(RiccDrift, SymmetricOutputs) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const LinearGaussianModel m = random_model(2, 2, trial);
    Eigen::MatrixXd B(2, 2);
    for (int i = 0; i < 4; ++i) B.data()[i] = nd(rng);
    const Eigen::MatrixXd P = B * B.transpose();
    const Eigen::MatrixXd r = ricc_drift(m, P), s = sricc_drift(m, P);
    EXPECT_LE((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    // Against the formulas written out without the symmetrization.
    const Eigen::MatrixXd r_naive = m.A() * P + P * m.A().transpose() - P * m.S() * P + m.R1();
    const Eigen::MatrixXd left = m.A() - P * m.S();
    const Eigen::MatrixXd s_naive = left * P * (m.A().transpose() - m.S() * P);
    EXPECT_LE((r - r_naive).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((s - s_naive).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RiccatiStep, SecondOrderHandValue) {
  // level 1: dt = 0.5, P' = 1 + 0 * 0.5 + 1 * 0.25.
  const ReferenceState next = riccati_step(unit_model(), state_at(1, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(next.P(0, 0), 1.25);
  EXPECT_EQ(next.step, 1);
  EXPECT_EQ(next.level, 1);
}

TEST(RiccatiStep, NoDriftNoChange) {
  const LinearGaussianModel m = scalar_model(0.0, 0.0, 0.0, 1.0);
  EXPECT_EQ(riccati_step(m, state_at(3, 0.0, 0.7)).P(0, 0), 0.7);
}

TEST(RiccatiStep, KeepsSymmetry) {
  const LinearGaussianModel m = random_model(4, 3, 2);
  ReferenceState s{4, 0, m.M0(), m.P0()};
  for (int k = 0; k < 50; ++k) {
    s = riccati_step(m, s);
    EXPECT_LE((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RiccatiStep, IndefiniteCovarianceIsReportedNotClamped) {
  set_quiet(true);
  const LinearGaussianModel m = scalar_model(-3.0, 0.0, 0.1, 1.0);
  const ReferenceState next = riccati_step(m, state_at(0, 0.0, -1.0));
  EXPECT_LT(next.P(0, 0), 0.0);
  set_quiet(false);
}

TEST(KbfMeanStep, UnitGainCancelsMean) {
  ModelSpec s;
  s.A = Eigen::MatrixXd::Zero(2, 2);
  s.C = Eigen::MatrixXd::Identity(2, 2);
  s.R1_sqrt = Eigen::MatrixXd::Identity(2, 2);
  s.R2_sqrt = Eigen::MatrixXd::Identity(2, 2);
  s.M0 = Eigen::VectorXd::Zero(2);
  s.P0 = Eigen::MatrixXd::Identity(2, 2);
  const LinearGaussianModel m = validate_model(s);
  ReferenceState st{0, 0, Eigen::Vector2d(3.0, -7.0), Eigen::MatrixXd::Identity(2, 2)};
  const Eigen::Vector2d dY(0.25, 1.5);
  EXPECT_LE((kbf_mean_step(m, st, dY).m - dY).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KbfMeanStep, UnobservedIsEulerDecay) {
  const LinearGaussianModel m = scalar_model(-2.0, 0.0, 1.0, 1.0);
  const ReferenceState next = kbf_mean_step(m, state_at(2, 4.0, 1.0), Eigen::VectorXd::Constant(1, 9.0));
  EXPECT_DOUBLE_EQ(next.m(0), (1.0 - 2.0 * 0.25) * 4.0);
}

TEST(KbfMeanStep, ScalarHandValue) {
  // Grid steps are dyadic, so dt = 0.125 stands in for 0.1:
  // U = 0.5, m' = 2 - 2 * 0.125 + 0.5 * (0.3 - 2 * 0.125) = 1.775.
  const LinearGaussianModel m = scalar_model(-1.0, 1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(0.5 * m.CtR2inv()(0, 0), 0.5);
  const ReferenceState s = kbf_mean_step(m, state_at(3, 2.0, 0.5), Eigen::VectorXd::Constant(1, 0.3));
  EXPECT_NEAR(s.m(0), 1.775, 1e-15);
  EXPECT_EQ(s.P(0, 0), 0.5);
}

TEST(KbfMeanStep, DimensionMismatch) {
  const LinearGaussianModel m = random_model(2, 2, 1);
  ReferenceState st{0, 0, m.M0(), m.P0()};
  EXPECT_THROW(kbf_mean_step(m, st, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(RunReference, GridCount) {
  const LinearGaussianModel m = scalar_ou_model();
  const PathBundle p = generate_path(m, 1, 5, 1);
  const ReferenceTrajectory r = run_reference(m, p, 5);
  ASSERT_EQ(r.states.size(), 2u);
  EXPECT_EQ(r.states[1].step, 32);
  EXPECT_THROW(run_reference(m, p, 6), LevelMismatch);
}

TEST(RunReference, MatchesStepwiseRecursion) {
  const LinearGaussianModel m = random_model(2, 1, 3);
  const PathBundle p = generate_path(m, 2, 4, 8);
  const ReferenceTrajectory r = run_reference(m, p, 3);
  ReferenceState s{3, 0, m.M0(), m.P0()};
  const Eigen::MatrixXd dY = p.increments_at(3);
  for (long k = 0; k < dY.cols(); ++k) s = reference_step(m, s, dY.col(k));
  EXPECT_EQ(s.m, r.states.back().m);
  EXPECT_EQ(s.P, r.states.back().P);
}

TEST(RunReference, UnobservedCovarianceIgnoresData) {
  ModelSpec s = scalar_ou_model().spec();
  s.C = m1(0.0);
  const LinearGaussianModel m = validate_model(s);
  const ReferenceTrajectory a = run_reference(m, generate_path(m, 3, 4, 1), 4);
  const ReferenceTrajectory b = run_reference(m, generate_path(m, 3, 4, 2), 4);
  for (std::size_t t = 0; t < a.states.size(); ++t) EXPECT_EQ(a.states[t].P, b.states[t].P);
}

TEST(RunReference, ConvergesToAlgebraicRiccatiRoot) {
  const LinearGaussianModel m = scalar_ou_model();
  const double a = m.A()(0, 0), S = m.S()(0, 0), R1 = m.R1()(0, 0);
  // Positive root of 2 a P - S P^2 + R1 = 0.
  const double root = (a + std::sqrt(a * a + S * R1)) / S;
  for (int level : {8, 10}) {
    const ReferenceTrajectory r = run_reference(m, generate_path(m, 20, level, 3), level);
    EXPECT_LE(std::abs(r.states[20].P(0, 0) - root), 2.0 * step_size(level)) << "level " << level;
  }
}

TEST(RunReference, CovarianceOrderAcrossLevels) {
  const LinearGaussianModel m = scalar_ou_model();
  std::vector<std::pair<double, double>> pts;
  for (int l = 3; l <= 8; ++l) {
    const auto fine = riccati_sequence(m, l + 1, 10 * steps_per_unit(l + 1));
    const auto coarse = riccati_sequence(m, l, 10 * steps_per_unit(l));
    double worst = 0.0;
    for (int t = 0; t <= 10; ++t) {
      worst = std::max(worst, (coarse[t * steps_per_unit(l)] - fine[t * steps_per_unit(l + 1)]).norm());
    }
    pts.emplace_back(step_size(l), worst);
  }
  EXPECT_NEAR(fit_rate(pts).slope, 1.0, 0.3);
}

TEST(RunReference, MeanStrongErrorOrder) {
  const LinearGaussianModel m = scalar_ou_model();
  const PathBundle p = generate_path(m, 10, 12, 21);
  const ReferenceTrajectory ref = run_reference(m, p, 12);
  std::vector<std::pair<double, double>> pts;
  for (int l = 3; l <= 8; ++l) {
    const ReferenceTrajectory r = run_reference(m, p, l);
    double worst = 0.0;
    for (int t = 0; t <= 10; ++t) worst = std::max(worst, (r.states[t].m - ref.states[t].m).norm());
    pts.emplace_back(step_size(l), worst);
  }
  EXPECT_NEAR(fit_rate(pts).slope, 1.0, 0.3);
}

TEST(RunReference, RiccatiSequenceMatchesTrajectory) {
  const LinearGaussianModel m = random_model(3, 2, 4);
  const PathBundle p = generate_path(m, 2, 5, 1);
  const ReferenceTrajectory r = run_reference(m, p, 5);
  const auto seq = riccati_sequence(m, 5, p.steps());
  EXPECT_EQ(seq.back(), r.states.back().P);
  EXPECT_EQ(seq[32], r.states[1].P);
}

TEST(RunReference, CsvDump) {
  const LinearGaussianModel m = random_model(2, 2, 1);
  const ReferenceTrajectory r = run_reference(m, generate_path(m, 2, 3, 1), 3);
  std::ostringstream os;
  write_reference_csv(os, r);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,m_0,m_1,P_00,P_01,P_11");
}

}  // namespace
}  // namespace mlenkbf
