#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace mlenkbf {

// Philox4x32-10 block function (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Block 0 of the streams at particles first..first+7 for one step, i.e.
// philox4x32_10({0, first + lane, step_lo, step_hi}, key), computed lane-parallel.
void philox_first_blocks_x8(PhiloxKey key, std::uint32_t first_particle, std::uint64_t step,
                            PhiloxCounter* out);

// UniformRandomBitGenerator reading consecutive Philox blocks. Word 0 of the
// counter is the block index; words 1..3 carry the caller's coordinates.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(PhiloxKey key, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3)
      : key_(key), counter_{0, w1, w2, w3} {}
  // Same stream, with block 0 already computed by the caller.
  PhiloxEngine(PhiloxKey key, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3,
               const PhiloxCounter& block0)
      : key_(key), counter_{1, w1, w2, w3} {
    load(block0);
    pos_ = 0;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (pos_ == 2) refill();
    return buffer_[pos_++];
  }

 private:
  void refill();
  void load(const PhiloxCounter& out) {
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  }

  PhiloxKey key_;
  PhiloxCounter counter_;
  std::array<result_type, 2> buffer_{};
  int pos_ = 2;
};

// Finest-level increments are rounded to this dyadic grid so that sums of them
// are exact in double precision; coarse increments then equal the sum of
// their children bit for bit, whatever the summation order.
inline constexpr double kNoiseQuantum = 0x1p-40;
double quantize_slow(double x);
inline double quantize(double x) {
  // Adding 1.5 * 2^52 rounds the scaled value to an integer (ties to even),
  // the same result as nearbyint in the default rounding mode.
  constexpr double kMagic = 0x1.8p52;
  const double y = x * 0x1p40;
  if (!(y < 0x1p51 && y > -0x1p51)) return quantize_slow(x);
  return ((y + kMagic) - kMagic) * kNoiseQuantum;
}

enum class NoiseRole : std::uint32_t {
  signal = 1,        // W^i, particle signal noise
  observation = 2,   // V^i, perturbed-observation noise
  initial = 3,       // xi_0^i draws
  omega = 4,         // collapsed-representation noise
  truth_signal = 5,  // data-generating signal noise
  truth_observation = 6,
  truth_initial = 7,
  model = 8,  // random model generation
};

// Per-role count of finest-level draws, for checking which coordinates a
// scheme consumes.
struct NoiseUsage {
  std::array<std::atomic<long>, 9> draws{};
  long count(NoiseRole role) const { return draws[static_cast<std::size_t>(role)].load(); }
};

// Counter-based Gaussian streams. A value is a pure function of
// (seed, tag, role, particle, step), so concurrent queries need no locking and
// results do not depend on the evaluation schedule. `tag` separates otherwise
// identical streams, e.g. the independent levels of a multilevel estimator.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint32_t tag, int finest_level);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t tag() const { return tag_; }
  int finest_level() const { return finest_level_; }

  // Optional draw counter; not owned.
  void attach_usage(NoiseUsage* usage) { usage_ = usage; }

  // N(0, Delta_level I) increment over step `step` of the level grid. At the
  // finest level it is an independent quantized draw; at level l < finest it
  // is the sum of the two level-(l+1) increments 2*step and 2*step+1.
  Eigen::VectorXd increment(NoiseRole role, int level, std::uint64_t particle,
                            std::uint64_t step, int dim) const;

  // Increments for particles 0..cols-1 at one step of `level` (columns).
  void level_increments(NoiseRole role, int level, std::uint64_t step,
                        Eigen::Ref<Eigen::MatrixXd> out) const;

  // Unscaled, unquantized standard normals at the given coordinates.
  void standard_normals(NoiseRole role, std::uint64_t particle, std::uint64_t step,
                        std::span<double> out) const;

 private:
  PhiloxKey key(NoiseRole role) const;
  void count(NoiseRole role, long n) const;

  std::uint64_t seed_;
  std::uint32_t tag_;
  int finest_level_;
  NoiseUsage* usage_ = nullptr;
};

// Deterministic 64-bit mixer used to derive keys and child seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace mlenkbf
