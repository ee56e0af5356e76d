#include <vector>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/kernels.hpp"

namespace mlenkbf::serial {

Eigen::VectorXd column_mean(const Eigen::MatrixXd& particles) {
  const Eigen::Index d = particles.rows();
  const Eigen::Index n = particles.cols();
  if (n == 0) throw TooFewParticles(0);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index r = 0; r < d; ++r) m(r) += particles(r, i);
  return m / static_cast<double>(n);
}

SampleMoments sample_moments(const Eigen::MatrixXd& particles) {
  const Eigen::Index d = particles.rows();
  const Eigen::Index n = particles.cols();
  if (n < 2) throw TooFewParticles(n);
  SampleMoments out;
  out.m = column_mean(particles);
  out.P = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = r; c < d; ++c) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        acc += (particles(r, i) - out.m(r)) * (particles(c, i) - out.m(c));
      out.P(r, c) = out.P(c, r) = acc / static_cast<double>(n - 1);
    }
  }
  return out;
}

void stochastic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain, double dt,
                       const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                       const Eigen::MatrixXd& dV, Eigen::MatrixXd& particles) {
  const Eigen::Index dx = model.dx();
  const Eigen::Index dy = model.dy();
  std::vector<double> innovation(static_cast<std::size_t>(dy));
  std::vector<double> next(static_cast<std::size_t>(dx));
  for (Eigen::Index i = 0; i < particles.cols(); ++i) {
    for (Eigen::Index r = 0; r < dy; ++r) {
      double v = dY(r);
      for (Eigen::Index k = 0; k < dx; ++k) v -= model.C()(r, k) * particles(k, i) * dt;
      for (Eigen::Index k = 0; k < dy; ++k) v -= model.R2_sqrt()(r, k) * dV(k, i);
      innovation[static_cast<std::size_t>(r)] = v;
    }
    for (Eigen::Index r = 0; r < dx; ++r) {
      double v = particles(r, i);
      for (Eigen::Index k = 0; k < dx; ++k) v += model.A()(r, k) * particles(k, i) * dt;
      for (Eigen::Index k = 0; k < dx; ++k) v += model.R1_sqrt()(r, k) * dW(k, i);
      for (Eigen::Index k = 0; k < dy; ++k) v += gain(r, k) * innovation[static_cast<std::size_t>(k)];
      next[static_cast<std::size_t>(r)] = v;
    }
    for (Eigen::Index r = 0; r < dx; ++r) particles(r, i) = next[static_cast<std::size_t>(r)];
  }
}

void deterministic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain,
                          const Eigen::VectorXd& mean, double dt, const Eigen::VectorXd& dY,
                          const Eigen::MatrixXd& dW, Eigen::MatrixXd& particles) {
  const Eigen::Index dx = model.dx();
  const Eigen::Index dy = model.dy();
  std::vector<double> innovation(static_cast<std::size_t>(dy));
  std::vector<double> next(static_cast<std::size_t>(dx));
  for (Eigen::Index i = 0; i < particles.cols(); ++i) {
    for (Eigen::Index r = 0; r < dy; ++r) {
      double c_xi = 0.0, c_m = 0.0;
      for (Eigen::Index k = 0; k < dx; ++k) {
        c_xi += model.C()(r, k) * particles(k, i);
        c_m += model.C()(r, k) * mean(k);
      }
      innovation[static_cast<std::size_t>(r)] = dY(r) - 0.5 * (c_xi + c_m) * dt;
    }
    for (Eigen::Index r = 0; r < dx; ++r) {
      double v = particles(r, i);
      for (Eigen::Index k = 0; k < dx; ++k) v += model.A()(r, k) * particles(k, i) * dt;
      for (Eigen::Index k = 0; k < dx; ++k) v += model.R1_sqrt()(r, k) * dW(k, i);
      for (Eigen::Index k = 0; k < dy; ++k) v += gain(r, k) * innovation[static_cast<std::size_t>(k)];
      next[static_cast<std::size_t>(r)] = v;
    }
    for (Eigen::Index r = 0; r < dx; ++r) particles(r, i) = next[static_cast<std::size_t>(r)];
  }
}

void collapsed_update(const StepCoefficients& coef, const Eigen::VectorXd& dY,
                      const Eigen::MatrixXd& omega, Eigen::MatrixXd& particles) {
  const Eigen::Index dx = particles.rows();
  const Eigen::Index dy = dY.size();
  std::vector<double> next(static_cast<std::size_t>(dx));
  for (Eigen::Index i = 0; i < particles.cols(); ++i) {
    for (Eigen::Index r = 0; r < dx; ++r) {
      double v = 0.0;
      for (Eigen::Index k = 0; k < dx; ++k) v += coef.B(r, k) * particles(k, i);
      for (Eigen::Index k = 0; k < dy; ++k) v += coef.U(r, k) * dY(k);
      for (Eigen::Index k = 0; k < dx; ++k) v += coef.alpha(r, k) * omega(k, i);
      next[static_cast<std::size_t>(r)] = v;
    }
    for (Eigen::Index r = 0; r < dx; ++r) particles(r, i) = next[static_cast<std::size_t>(r)];
  }
}

}  // namespace mlenkbf::serial
