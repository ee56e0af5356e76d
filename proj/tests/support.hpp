#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlenkbf/model.hpp"

namespace mlenkbf::testing {

inline Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

inline LinearGaussianModel scalar_model(double a, double c, double r1s, double r2s,
                                        double m0 = 0.0, double p0 = 1.0) {
  ModelSpec s;
  s.A = m1(a);
  s.C = m1(c);
  s.R1_sqrt = m1(r1s);
  s.R2_sqrt = m1(r2s);
  s.M0 = Eigen::VectorXd::Constant(1, m0);
  s.P0 = m1(p0);
  ValidationOptions opt;
  opt.require_invertible_signal_noise = r1s != 0.0;
  return validate_model(s, opt);
}

// A = 0, C = 0: no drift and no observation feedback, so every scheme reduces
// to xi + R1^{1/2} (sum of Brownian increments).
inline LinearGaussianModel frozen_model(int dx, int dy, double r1s = 1.0) {
  ModelSpec s;
  s.A = Eigen::MatrixXd::Zero(dx, dx);
  s.C = Eigen::MatrixXd::Zero(dy, dx);
  s.R1_sqrt = r1s * Eigen::MatrixXd::Identity(dx, dx);
  s.R2_sqrt = Eigen::MatrixXd::Identity(dy, dy);
  s.M0 = Eigen::VectorXd::Constant(dx, 1.0);
  s.P0 = Eigen::MatrixXd::Identity(dx, dx);
  ValidationOptions opt;
  opt.require_invertible_signal_noise = r1s != 0.0;
  return validate_model(s, opt);
}

// Removes the named column (located through the header line) from a CSV dump.
inline std::string drop_column(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string out;
  long target = -1;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    if (target < 0) {
      for (std::size_t k = 0; k < fields.size(); ++k)
        if (fields[k] == name) target = static_cast<long>(k);
    }
    bool first = true;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (static_cast<long>(k) == target) continue;
      out += (first ? "" : ",") + fields[k];
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace mlenkbf::testing
