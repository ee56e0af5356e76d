#pragma once

#include <Eigen/Core>

namespace mlenkbf {

// Particle kernels split the ensemble into fixed-width column chunks. The width
// does not depend on the thread count, so each chunk performs the same
// floating-point operations however the chunks are scheduled.
inline constexpr Eigen::Index kChunkColumns = 256;

// Below this many scalar updates the fork/join overhead dominates.
inline constexpr Eigen::Index kParallelWorkThreshold = 16384;

inline bool parallel_worthwhile(Eigen::Index work) { return work >= kParallelWorkThreshold; }

inline Eigen::Index chunk_count(Eigen::Index cols) {
  return (cols + kChunkColumns - 1) / kChunkColumns;
}

// Worker count hint (wraps omp_set_num_threads); results never depend on it.
void set_threads(int n);
int max_threads();

}  // namespace mlenkbf
