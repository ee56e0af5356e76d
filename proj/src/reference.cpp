#include "mlenkbf/reference.hpp"

#include <ostream>
#include <string>

#include "mlenkbf/csv.hpp"
#include "mlenkbf/diagnostics.hpp"
#include "mlenkbf/errors.hpp"

namespace mlenkbf {
namespace {

// min eigenvalue < -tol  <=>  P + tol*I is not positive definite
bool breaches_psd(const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd shifted =
      P + kRiccatiBreachTolerance * Eigen::MatrixXd::Identity(P.rows(), P.cols());
  return Eigen::LLT<Eigen::MatrixXd>(shifted).info() != Eigen::Success;
}

Eigen::MatrixXd riccati_update(const LinearGaussianModel& model, const Eigen::MatrixXd& P,
                               double dt) {
  Eigen::MatrixXd next = P + ricc_drift(model, P) * dt + sricc_drift(model, P) * (dt * dt);
  return 0.5 * (next + next.transpose());
}

}  // namespace

Eigen::MatrixXd ricc_drift(const LinearGaussianModel& model, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd AP = model.A() * P;
  Eigen::MatrixXd out = AP + AP.transpose() - P * model.S() * P + model.R1();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd sricc_drift(const LinearGaussianModel& model, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd left = model.A() - P * model.S();
  Eigen::MatrixXd out = left * P * left.transpose();
  return 0.5 * (out + out.transpose());
}

ReferenceState riccati_step(const LinearGaussianModel& model, const ReferenceState& state) {
  ReferenceState next = state;
  next.P = riccati_update(model, state.P, step_size(state.level));
  next.step = state.step + 1;
  if (breaches_psd(next.P)) {
    warn("riccati", "discretized covariance lost positive semi-definiteness at level " +
                        std::to_string(state.level) + ", step " + std::to_string(next.step));
  }
  return next;
}

ReferenceState kbf_mean_step(const LinearGaussianModel& model, const ReferenceState& state,
                             const Eigen::VectorXd& dY) {
  if (dY.size() != model.dy() || state.m.size() != model.dx()) {
    throw DimensionMismatch("kbf_mean_step: increment or mean has the wrong dimension");
  }
  const double dt = step_size(state.level);
  const Eigen::MatrixXd gain = state.P * model.CtR2inv();
  ReferenceState next = state;
  next.m = state.m + model.A() * state.m * dt + gain * (dY - model.C() * state.m * dt);
  return next;
}

ReferenceState reference_step(const LinearGaussianModel& model, const ReferenceState& state,
                              const Eigen::VectorXd& dY) {
  return riccati_step(model, kbf_mean_step(model, state, dY));
}

ReferenceTrajectory run_reference(const LinearGaussianModel& model, const PathBundle& path,
                                  int level) {
  if (level > path.level_gen || level < 0) {
    throw LevelMismatch("reference level " + std::to_string(level) + " outside [0, " +
                        std::to_string(path.level_gen) + "]");
  }
  const Eigen::MatrixXd increments = path.increments_at(level);
  const long per_unit = steps_per_unit(level);
  const double dt = step_size(level);

  ReferenceTrajectory traj;
  traj.level = level;
  traj.states.reserve(static_cast<std::size_t>(path.T) + 1);
  ReferenceState state{level, 0, model.M0(), model.P0()};
  traj.states.push_back(state);
  for (long k = 0; k < increments.cols(); ++k) {
    // Same arithmetic as reference_step; the breach check is counted here.
    const Eigen::MatrixXd gain = state.P * model.CtR2inv();
    state.m = state.m + model.A() * state.m * dt +
              gain * (increments.col(k) - model.C() * state.m * dt);
    state.P = riccati_update(model, state.P, dt);
    state.step = k + 1;
    if (breaches_psd(state.P)) ++traj.psd_breaches;
    if (state.step % per_unit == 0) traj.states.push_back(state);
  }
  if (traj.psd_breaches > 0) {
    warn("riccati", "discretized covariance lost positive semi-definiteness on " +
                        std::to_string(traj.psd_breaches) + " steps at level " +
                        std::to_string(level));
  }
  return traj;
}

std::vector<Eigen::MatrixXd> riccati_sequence(const LinearGaussianModel& model, int level,
                                              long steps) {
  std::vector<Eigen::MatrixXd> seq;
  seq.reserve(static_cast<std::size_t>(steps) + 1);
  seq.push_back(model.P0());
  const double dt = step_size(level);
  for (long k = 0; k < steps; ++k) seq.push_back(riccati_update(model, seq.back(), dt));
  return seq;
}

void write_reference_csv(std::ostream& os, const ReferenceTrajectory& trajectory) {
  if (trajectory.states.empty()) return;
  const Eigen::Index dx = trajectory.states.front().m.size();
  CsvWriter csv(os);
  std::vector<std::string> header{"t"};
  for (Eigen::Index j = 0; j < dx; ++j) header.push_back("m_" + std::to_string(j));
  for (Eigen::Index r = 0; r < dx; ++r)
    for (Eigen::Index c = r; c < dx; ++c)
      header.push_back(dx <= 10 ? "P_" + std::to_string(r) + std::to_string(c)
                                : "P_" + std::to_string(r) + "_" + std::to_string(c));
  csv.header(header);
  for (std::size_t t = 0; t < trajectory.states.size(); ++t) {
    const auto& s = trajectory.states[t];
    csv.field(static_cast<long>(t));
    for (Eigen::Index j = 0; j < dx; ++j) csv.field(s.m(j));
    for (Eigen::Index r = 0; r < dx; ++r)
      for (Eigen::Index c = r; c < dx; ++c) csv.field(s.P(r, c));
    csv.end_row();
  }
}

}  // namespace mlenkbf
