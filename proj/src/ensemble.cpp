#include "mlenkbf/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <span>
#include <string>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/parallel.hpp"

namespace mlenkbf {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::stochastic: return "EnKBF";
    case Variant::deterministic: return "DEnKBF";
    case Variant::iid: return "iid";
    case Variant::collapsed: return "collapsed";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  if (s == "EnKBF" || s == "stochastic") return Variant::stochastic;
  if (s == "DEnKBF" || s == "deterministic") return Variant::deterministic;
  if (s == "iid") return Variant::iid;
  if (s == "collapsed") return Variant::collapsed;
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

Ensemble initial_ensemble(const LinearGaussianModel& model, long N, int level, Variant variant,
                          const NoiseStream& stream) {
  if (N < 2) throw TooFewParticles(N);
  const int dx = model.dx();
  Ensemble ens;
  ens.level = level;
  ens.step = 0;
  ens.variant = variant;
  ens.particles.resize(dx, N);
#pragma omp parallel for schedule(static) if (parallel_worthwhile(N * dx))
  for (long i = 0; i < N; ++i) {
    Eigen::VectorXd z(dx);
    stream.standard_normals(NoiseRole::initial, static_cast<std::uint64_t>(i), 0,
                            std::span<double>(z.data(), static_cast<std::size_t>(dx)));
    Eigen::VectorXd x = model.M0() + model.P0_sqrt() * z;
    for (int j = 0; j < dx; ++j) ens.particles(j, i) = quantize(x(j));
  }
  return ens;
}

SampleMoments sample_moments(const Ensemble& ensemble) {
  return kernels::sample_moments(ensemble.particles);
}

Eigen::MatrixXd kalman_gain(const LinearGaussianModel& model, const Eigen::MatrixXd& P) {
  return P * model.CtR2inv();
}

StepCoefficients step_coefficients(const LinearGaussianModel& model, const Eigen::MatrixXd& P,
                                   double dt) {
  const int dx = model.dx();
  StepCoefficients coef;
  coef.B = Eigen::MatrixXd::Identity(dx, dx) + model.A() * dt - P * model.S() * dt;
  coef.U = kalman_gain(model, P);
  Eigen::MatrixXd inner = model.R1() + P * model.S() * P;
  inner = 0.5 * (inner + inner.transpose());
  coef.alpha = sym_psd_sqrt(inner) * std::sqrt(dt);
  return coef;
}

void advance_ensemble(const LinearGaussianModel& model, Ensemble& ensemble,
                      const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                      const Eigen::MatrixXd& dV, const Eigen::MatrixXd* gain_covariance) {
  const long N = ensemble.size();
  if (N < 2) throw TooFewParticles(N);
  if (dY.size() != model.dy() || dW.rows() != model.dx() || dW.cols() != N) {
    throw DimensionMismatch("advance_ensemble: increment shapes do not match the ensemble");
  }
  const double dt = step_size(ensemble.level);
  switch (ensemble.variant) {
    case Variant::stochastic:
    case Variant::iid: {
      if (dV.rows() != model.dy() || dV.cols() != N) {
        throw DimensionMismatch("advance_ensemble: dV shape does not match the ensemble");
      }
      if (ensemble.variant == Variant::iid && gain_covariance == nullptr) {
        throw LevelMismatch("iid step needs the reference covariance");
      }
      const Eigen::MatrixXd gain =
          kalman_gain(model, gain_covariance ? *gain_covariance
                                             : kernels::sample_moments(ensemble.particles).P);
      kernels::stochastic_update(model, gain, dt, dY, dW, dV, ensemble.particles);
      break;
    }
    case Variant::deterministic: {
      SampleMoments mom = kernels::sample_moments(ensemble.particles);
      const Eigen::MatrixXd gain = kalman_gain(model, gain_covariance ? *gain_covariance : mom.P);
      kernels::deterministic_update(model, gain, mom.m, dt, dY, dW, ensemble.particles);
      break;
    }
    case Variant::collapsed:
      throw Error("advance_ensemble does not handle the collapsed variant");
  }
  ++ensemble.step;
}

StepNoise draw_step_noise(const LinearGaussianModel& model, const NoiseStream& stream,
                          Variant variant, int level, long step, long N) {
  StepNoise noise;
  noise.dW.resize(model.dx(), N);
  stream.level_increments(NoiseRole::signal, level, static_cast<std::uint64_t>(step), noise.dW);
  if (variant != Variant::deterministic) {
    noise.dV.resize(model.dy(), N);
    stream.level_increments(NoiseRole::observation, level, static_cast<std::uint64_t>(step),
                            noise.dV);
  }
  return noise;
}

Ensemble enkbf_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                    const Eigen::VectorXd& dY, const NoiseStream& stream) {
  Ensemble next = ensemble;
  next.variant = Variant::stochastic;
  const StepNoise noise =
      draw_step_noise(model, stream, next.variant, next.level, next.step, next.size());
  advance_ensemble(model, next, dY, noise.dW, noise.dV);
  return next;
}

Ensemble denkbf_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                     const Eigen::VectorXd& dY, const NoiseStream& stream) {
  Ensemble next = ensemble;
  next.variant = Variant::deterministic;
  const StepNoise noise =
      draw_step_noise(model, stream, next.variant, next.level, next.step, next.size());
  advance_ensemble(model, next, dY, noise.dW, noise.dV);
  return next;
}

Ensemble iid_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                  const Eigen::VectorXd& dY, const ReferenceState& reference,
                  const NoiseStream& stream) {
  if (reference.level != ensemble.level || reference.step != ensemble.step) {
    throw LevelMismatch("reference at (level " + std::to_string(reference.level) + ", step " +
                        std::to_string(reference.step) + ") but ensemble at (level " +
                        std::to_string(ensemble.level) + ", step " +
                        std::to_string(ensemble.step) + ")");
  }
  Ensemble next = ensemble;
  next.variant = Variant::iid;
  const StepNoise noise =
      draw_step_noise(model, stream, next.variant, next.level, next.step, next.size());
  advance_ensemble(model, next, dY, noise.dW, noise.dV, &reference.P);
  return next;
}

namespace {

Eigen::MatrixXd draw_omega(const LinearGaussianModel& model, const NoiseStream& stream, long step,
                           long N) {
  Eigen::MatrixXd omega(model.dx(), N);
  for (long i = 0; i < N; ++i) {
    stream.standard_normals(NoiseRole::omega, static_cast<std::uint64_t>(i),
                            static_cast<std::uint64_t>(step),
                            std::span<double>(omega.col(i).data(),
                                              static_cast<std::size_t>(model.dx())));
  }
  return omega;
}

}  // namespace

Ensemble collapsed_step(const LinearGaussianModel& model, const Ensemble& ensemble,
                        const Eigen::VectorXd& dY, const NoiseStream& stream) {
  Ensemble next = ensemble;
  next.variant = Variant::collapsed;
  const StepCoefficients coef =
      step_coefficients(model, sample_moments(ensemble).P, step_size(ensemble.level));
  const Eigen::MatrixXd omega = draw_omega(model, stream, ensemble.step, ensemble.size());
  kernels::collapsed_update(coef, dY, omega, next.particles);
  ++next.step;
  return next;
}

RecursionCheck recursion_check(const LinearGaussianModel& model, const Ensemble& ensemble,
                               const Eigen::VectorXd& dY, const NoiseStream& stream) {
  return recursion_check(model, ensemble, dY,
                         draw_omega(model, stream, ensemble.step, ensemble.size()));
}

RecursionCheck recursion_check(const LinearGaussianModel& model, const Ensemble& ensemble,
                               const Eigen::VectorXd& dY, const Eigen::MatrixXd& omega) {
  const long N = ensemble.size();
  if (N < 2) throw TooFewParticles(N);
  if (omega.rows() != model.dx() || omega.cols() != N) {
    throw DimensionMismatch("recursion_check: omega must be d_x x N");
  }
  const double dt = step_size(ensemble.level);
  const SampleMoments before = sample_moments(ensemble);
  const StepCoefficients coef = step_coefficients(model, before.P, dt);

  RecursionCheck out;
  out.next = ensemble;
  out.next.variant = Variant::collapsed;
  kernels::collapsed_update(coef, dY, omega, out.next.particles);
  ++out.next.step;
  const SampleMoments after = sample_moments(out.next);

  const Eigen::VectorXd omega_bar = omega.rowwise().mean();
  const Eigen::VectorXd mean_rhs = (model.A() - before.P * model.S()) * dt * before.m +
                                   coef.U * dY + coef.alpha * omega_bar;
  out.mean_residual = ((after.m - before.m) - mean_rhs).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd dw = omega.colwise() - omega_bar;
  const Eigen::MatrixXd dxi = ensemble.particles.colwise() - before.m;
  const double inv = 1.0 / static_cast<double>(N - 1);
  const Eigen::MatrixXd omega_cov = dw * dw.transpose() * inv;
  const Eigen::MatrixXd cross = dw * dxi.transpose() * inv;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(model.dx(), model.dx());
  const Eigen::MatrixXd sym_term = coef.alpha * cross * coef.B.transpose();
  const Eigen::MatrixXd cov_rhs = ricc_drift(model, before.P) * dt +
                                  sricc_drift(model, before.P) * dt * dt +
                                  coef.alpha * (omega_cov - I) * coef.alpha +
                                  (sym_term + sym_term.transpose());
  out.cov_residual = ((after.P - before.P) - cov_rhs).cwiseAbs().maxCoeff();
  return out;
}

RunRecord run_single_level(const LinearGaussianModel& model, const PathBundle& path, long N,
                           int level, Variant variant, std::uint64_t seed) {
  if (level > path.level_gen) {
    throw LevelMismatch("level " + std::to_string(level) + " exceeds path level " +
                        std::to_string(path.level_gen));
  }
  const auto start = std::chrono::steady_clock::now();
  const NoiseStream stream(seed, kSingleLevelTag, level);
  const Eigen::MatrixXd dY = path.increments_at(level);
  const long per_unit = steps_per_unit(level);
  const long steps = dY.cols();

  std::vector<Eigen::MatrixXd> reference_P;
  if (variant == Variant::iid) reference_P = riccati_sequence(model, level, steps);

  Ensemble ens = initial_ensemble(model, N, level, variant, stream);
  RunRecord record;
  record.variant = std::string(to_string(variant));
  record.level = level;
  record.N = {N};
  record.seed = seed;
  record.estimate.reserve(static_cast<std::size_t>(path.T) + 1);
  record.estimate.push_back(kernels::column_mean(ens.particles));

  for (long k = 0; k < steps; ++k) {
    const Eigen::VectorXd y = dY.col(k);
    if (variant == Variant::collapsed) {
      ens = collapsed_step(model, ens, y, stream);
    } else {
      const StepNoise noise = draw_step_noise(model, stream, variant, level, k, N);
      advance_ensemble(model, ens, y, noise.dW, noise.dV,
                       variant == Variant::iid ? &reference_P[static_cast<std::size_t>(k)]
                                               : nullptr);
    }
    if ((k + 1) % per_unit == 0) record.estimate.push_back(kernels::column_mean(ens.particles));
  }

  record.cost_paper = static_cast<double>(N) * static_cast<double>(per_unit) * path.T;
  record.cost_actual = record.cost_paper;
  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace mlenkbf
