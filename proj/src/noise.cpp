#include "mlenkbf/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>

#include "mlenkbf/parallel.hpp"

namespace mlenkbf {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

__attribute__((target_clones("avx512f", "avx2", "default"))) void philox_first_blocks_x8(
    PhiloxKey key, std::uint32_t first_particle, std::uint64_t step, PhiloxCounter* out) {
  // Structure-of-arrays lanes so the rounds vectorize.
  std::uint32_t c0[8], c1[8], c2[8], c3[8];
  for (std::uint32_t l = 0; l < 8; ++l) {
    c0[l] = 0;
    c1[l] = first_particle + l;
    c2[l] = static_cast<std::uint32_t>(step);
    c3[l] = static_cast<std::uint32_t>(step >> 32);
  }
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    for (int l = 0; l < 8; ++l) {
      const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c0[l];
      const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c2[l];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[l] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[l] ^ k1;
      c1[l] = static_cast<std::uint32_t>(p1);
      c3[l] = static_cast<std::uint32_t>(p0);
      c0[l] = n0;
      c2[l] = n2;
    }
  }
  for (int l = 0; l < 8; ++l) out[l] = {c0[l], c1[l], c2[l], c3[l]};
}

void PhiloxEngine::refill() {
  load(philox4x32_10(counter_, key_));
  ++counter_[0];
  pos_ = 0;
}

double quantize_slow(double x) { return std::nearbyint(x / kNoiseQuantum) * kNoiseQuantum; }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace {

PhiloxCounter block0_counter(std::uint64_t particle, std::uint64_t step) {
  return {0, static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(step),
          static_cast<std::uint32_t>(step >> 32)};
}

// Quantized scale * z for one coordinate, given the first Philox block.
void fill_column(PhiloxKey key, std::uint64_t particle, std::uint64_t step, double scale,
                 const PhiloxCounter& block0, double* out, int dim) {
  PhiloxEngine engine(key, static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(step),
                      static_cast<std::uint32_t>(step >> 32), block0);
  boost::random::normal_distribution<double> normal;
  for (int j = 0; j < dim; ++j) out[j] = quantize(scale * normal(engine));
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint32_t tag, int finest_level)
    : seed_(seed), tag_(tag), finest_level_(finest_level) {
  if (finest_level < 0) throw std::invalid_argument("finest level must be non-negative");
}

PhiloxKey NoiseStream::key(NoiseRole role) const {
  const std::uint64_t k = mix64(mix64(seed_) ^ (static_cast<std::uint64_t>(role) << 32 | tag_));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void NoiseStream::count(NoiseRole role, long n) const {
  if (usage_ != nullptr) {
    usage_->draws[static_cast<std::size_t>(role)].fetch_add(n, std::memory_order_relaxed);
  }
}

Eigen::VectorXd NoiseStream::increment(NoiseRole role, int level, std::uint64_t particle,
                                       std::uint64_t step, int dim) const {
  if (level > finest_level_) throw std::invalid_argument("level above the stream's finest level");
  Eigen::VectorXd out(dim);
  if (level == finest_level_) {
    count(role, 1);
    const PhiloxKey k = key(role);
    fill_column(k, particle, step, std::sqrt(std::ldexp(1.0, -level)),
                philox4x32_10(block0_counter(particle, step), k), out.data(), dim);
    return out;
  }
  out = increment(role, level + 1, particle, 2 * step, dim);
  out += increment(role, level + 1, particle, 2 * step + 1, dim);
  return out;
}

void NoiseStream::level_increments(NoiseRole role, int level, std::uint64_t step,
                                   Eigen::Ref<Eigen::MatrixXd> out) const {
  const Eigen::Index n = out.cols();
  const int dim = static_cast<int>(out.rows());
  if (level == finest_level_) {
    count(role, static_cast<long>(n));
    const double scale = std::sqrt(std::ldexp(1.0, -level));
    const PhiloxKey k = key(role);
    const Eigen::Index groups = (n + 7) / 8;
#pragma omp parallel for schedule(static) if (parallel_worthwhile(n * dim))
    for (Eigen::Index g = 0; g < groups; ++g) {
      const Eigen::Index first = 8 * g;
      const int lanes = static_cast<int>(std::min<Eigen::Index>(8, n - first));
      PhiloxCounter blocks[8];
      philox_first_blocks_x8(k, static_cast<std::uint32_t>(first), step, blocks);
      for (int lane = 0; lane < lanes; ++lane) {
        fill_column(k, static_cast<std::uint64_t>(first + lane), step, scale, blocks[lane],
                    out.col(first + lane).data(), dim);
      }
    }
    return;
  }
#pragma omp parallel for schedule(static) if (parallel_worthwhile(n * dim))
  for (Eigen::Index i = 0; i < n; ++i) {
    out.col(i) = increment(role, level, static_cast<std::uint64_t>(i), step, dim);
  }
}

void NoiseStream::standard_normals(NoiseRole role, std::uint64_t particle, std::uint64_t step,
                                   std::span<double> out) const {
  count(role, 1);
  PhiloxEngine engine(key(role), static_cast<std::uint32_t>(particle),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32));
  boost::random::normal_distribution<double> normal;
  for (double& v : out) v = normal(engine);
}

}  // namespace mlenkbf
