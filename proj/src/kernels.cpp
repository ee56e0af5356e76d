#include "mlenkbf/kernels.hpp"

#include <algorithm>
#include <vector>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/parallel.hpp"

namespace mlenkbf::kernels {
namespace {

template <typename Fn>
void for_each_chunk(Eigen::Index cols, Eigen::Index rows, Fn&& fn) {
  const Eigen::Index chunks = chunk_count(cols);
#pragma omp parallel for schedule(static) if (parallel_worthwhile(cols * rows) && chunks > 1)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kChunkColumns;
    fn(begin, std::min(kChunkColumns, cols - begin));
  }
}

template <typename T>
T tree_sum(const std::vector<T>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = tree_sum(parts, lo, mid);
  left += tree_sum(parts, mid, hi);
  return left;
}

// Below this dimension the updates run as per-particle loops; Eigen's
// products only pay off for larger blocks.
constexpr Eigen::Index kSmallDim = 8;

bool small(const LinearGaussianModel& model) {
  return model.dx() <= kSmallDim && model.dy() <= kSmallDim;
}

// Small inner dimensions go through coefficient-based products.
template <typename L, typename R>
Eigen::MatrixXd product(const L& lhs, const R& rhs) {
  if (lhs.cols() <= 8) return lhs.lazyProduct(rhs);
  return lhs * rhs;
}

}  // namespace

Eigen::VectorXd column_mean(const Eigen::MatrixXd& particles) {
  const Eigen::Index n = particles.cols();
  if (n == 0) throw TooFewParticles(0);
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(chunk_count(n)));
  for_each_chunk(n, particles.rows(), [&](Eigen::Index begin, Eigen::Index width) {
    partial[static_cast<std::size_t>(begin / kChunkColumns)] =
        particles.middleCols(begin, width).rowwise().sum();
  });
  return tree_sum(partial, 0, partial.size()) / static_cast<double>(n);
}

SampleMoments sample_moments(const Eigen::MatrixXd& particles) {
  const Eigen::Index n = particles.cols();
  if (n < 2) throw TooFewParticles(n);
  SampleMoments out;
  out.m = column_mean(particles);
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunk_count(n)));
  for_each_chunk(n, particles.rows(), [&](Eigen::Index begin, Eigen::Index width) {
    const Eigen::MatrixXd centered = particles.middleCols(begin, width).colwise() - out.m;
    partial[static_cast<std::size_t>(begin / kChunkColumns)] =
        product(centered, centered.transpose());
  });
  Eigen::MatrixXd P = tree_sum(partial, 0, partial.size()) / static_cast<double>(n - 1);
  out.P = 0.5 * (P + P.transpose());
  return out;
}

void stochastic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain, double dt,
                       const Eigen::VectorXd& dY, const Eigen::MatrixXd& dW,
                       const Eigen::MatrixXd& dV, Eigen::MatrixXd& particles) {
  if (small(model)) {
    const Eigen::Index dx = model.dx(), dy = model.dy();
    const Eigen::MatrixXd Adt = model.A() * dt, Cdt = model.C() * dt;
    const Eigen::MatrixXd& R1s = model.R1_sqrt();
    const Eigen::MatrixXd& R2s = model.R2_sqrt();
    for_each_chunk(particles.cols(), dx, [&](Eigen::Index begin, Eigen::Index width) {
      double innovation[kSmallDim], next[kSmallDim];
      for (Eigen::Index i = begin; i < begin + width; ++i) {
        const double* x = particles.col(i).data();
        const double* w = dW.col(i).data();
        const double* v = dV.col(i).data();
        for (Eigen::Index r = 0; r < dy; ++r) {
          double cx = 0.0, rv = 0.0;
          for (Eigen::Index k = 0; k < dx; ++k) cx += Cdt(r, k) * x[k];
          for (Eigen::Index k = 0; k < dy; ++k) rv += R2s(r, k) * v[k];
          innovation[r] = dY(r) - (cx + rv);
        }
        for (Eigen::Index r = 0; r < dx; ++r) {
          double ax = 0.0, rw = 0.0, gi = 0.0;
          for (Eigen::Index k = 0; k < dx; ++k) ax += Adt(r, k) * x[k];
          for (Eigen::Index k = 0; k < dx; ++k) rw += R1s(r, k) * w[k];
          for (Eigen::Index k = 0; k < dy; ++k) gi += gain(r, k) * innovation[k];
          next[r] = x[r] + ax + rw + gi;
        }
        std::copy(next, next + dx, particles.col(i).data());
      }
    });
    return;
  }
  for_each_chunk(particles.cols(), particles.rows(), [&](Eigen::Index begin, Eigen::Index width) {
    auto X = particles.middleCols(begin, width);
    Eigen::MatrixXd innovation =
        -(product(model.C(), X) * dt) - product(model.R2_sqrt(), dV.middleCols(begin, width));
    innovation.colwise() += dY;
    Eigen::MatrixXd next = X + product(model.A(), X) * dt +
                           product(model.R1_sqrt(), dW.middleCols(begin, width)) +
                           product(gain, innovation);
    X = next;
  });
}

void deterministic_update(const LinearGaussianModel& model, const Eigen::MatrixXd& gain,
                          const Eigen::VectorXd& mean, double dt, const Eigen::VectorXd& dY,
                          const Eigen::MatrixXd& dW, Eigen::MatrixXd& particles) {
  const Eigen::VectorXd Cm = model.C() * mean;
  if (small(model)) {
    const Eigen::Index dx = model.dx(), dy = model.dy();
    const Eigen::MatrixXd Adt = model.A() * dt;
    const Eigen::MatrixXd& C = model.C();
    const Eigen::MatrixXd& R1s = model.R1_sqrt();
    for_each_chunk(particles.cols(), dx, [&](Eigen::Index begin, Eigen::Index width) {
      double innovation[kSmallDim], next[kSmallDim];
      for (Eigen::Index i = begin; i < begin + width; ++i) {
        const double* x = particles.col(i).data();
        const double* w = dW.col(i).data();
        for (Eigen::Index r = 0; r < dy; ++r) {
          double cx = 0.0;
          for (Eigen::Index k = 0; k < dx; ++k) cx += C(r, k) * x[k];
          innovation[r] = dY(r) - (cx + Cm(r)) * (0.5 * dt);
        }
        for (Eigen::Index r = 0; r < dx; ++r) {
          double ax = 0.0, rw = 0.0, gi = 0.0;
          for (Eigen::Index k = 0; k < dx; ++k) ax += Adt(r, k) * x[k];
          for (Eigen::Index k = 0; k < dx; ++k) rw += R1s(r, k) * w[k];
          for (Eigen::Index k = 0; k < dy; ++k) gi += gain(r, k) * innovation[k];
          next[r] = x[r] + ax + rw + gi;
        }
        std::copy(next, next + dx, particles.col(i).data());
      }
    });
    return;
  }
  for_each_chunk(particles.cols(), particles.rows(), [&](Eigen::Index begin, Eigen::Index width) {
    auto X = particles.middleCols(begin, width);
    Eigen::MatrixXd CX = product(model.C(), X);
    CX.colwise() += Cm;
    Eigen::MatrixXd innovation = -(CX * (0.5 * dt));
    innovation.colwise() += dY;
    Eigen::MatrixXd next = X + product(model.A(), X) * dt +
                           product(model.R1_sqrt(), dW.middleCols(begin, width)) +
                           product(gain, innovation);
    X = next;
  });
}

void collapsed_update(const StepCoefficients& coef, const Eigen::VectorXd& dY,
                      const Eigen::MatrixXd& omega, Eigen::MatrixXd& particles) {
  const Eigen::VectorXd UdY = coef.U * dY;
  for_each_chunk(particles.cols(), particles.rows(), [&](Eigen::Index begin, Eigen::Index width) {
    auto X = particles.middleCols(begin, width);
    Eigen::MatrixXd next = product(coef.B, X) + product(coef.alpha, omega.middleCols(begin, width));
    next.colwise() += UdY;
    X = next;
  });
}

}  // namespace mlenkbf::kernels
