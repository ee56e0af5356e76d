#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mlenkbf {

// Output of one filter run: the estimator eta_t(e) at integer times 0..T.
struct RunRecord {
  std::string variant;
  int level = 0;            // single-level: the level; multilevel: L
  std::vector<long> N;      // one entry per level
  std::uint64_t seed = 0;
  double eps = std::numeric_limits<double>::quiet_NaN();  // multilevel only
  int L = -1;                                             // multilevel only
  std::vector<Eigen::VectorXd> estimate;
  std::vector<Eigen::VectorXd> reference;  // filled by the harness when available
  double cost_paper = 0.0;   // sum_l N_l / Delta_l * T
  double cost_actual = 0.0;  // particle-substeps actually simulated
  double wall_ms = 0.0;

  bool is_multilevel() const { return L >= 0; }
  int T() const { return static_cast<int>(estimate.size()) - 1; }
  // ||estimate_t - reference_t||_2^2
  double squared_error(int t) const;
  double squared_error_final() const { return squared_error(T()); }
};

// Columns: variant,l,N,seed,t,est_0..,cost,wall_ms; multilevel records append
// eps,L,cost_paper,cost_actual (N is the total particle count across levels).
void write_run_csv(std::ostream& os, const RunRecord& record);

}  // namespace mlenkbf
