#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "mlenkbf/model.hpp"

namespace mlenkbf {

// Stream tag reserved for data generation so it never collides with filter
// streams, which use the level index as tag.
inline constexpr std::uint32_t kPathStreamTag = 0xFFFF'FFFFu;

inline double step_size(int level) { return std::ldexp(1.0, -level); }
inline long steps_per_unit(int level) { return 1L << level; }

// One data realization at the generation level: the observation increments
// dY_k over each finest step and the Euler-simulated signal at the grid points.
struct PathBundle {
  int level_gen = 0;
  int T = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd obs_increments;  // d_y x T*2^level_gen
  Eigen::MatrixXd truth;           // d_x x (T*2^level_gen + 1), diagnostic only

  long steps() const { return static_cast<long>(obs_increments.cols()); }
  // Observation increments aggregated to `level` (<= level_gen).
  Eigen::MatrixXd increments_at(int level) const;
};

PathBundle generate_path(const LinearGaussianModel& model, int T, int level_gen,
                         std::uint64_t seed);

// Column j of the result is the sum of input block j of width 2^(from-to).
// Blocks are summed as a pairwise tree, so aggregating in stages gives the same
// bits as aggregating at once. Throws BadLength.
Eigen::MatrixXd aggregate_increments(const Eigen::MatrixXd& increments, int from_level,
                                     int to_level);

// CSV columns: step,t,truth_0..,dY_0.. (the last grid point has no increment row).
void write_path_csv(std::ostream& os, const PathBundle& path);

}  // namespace mlenkbf
