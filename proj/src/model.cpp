#include "mlenkbf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "mlenkbf/errors.hpp"
#include "mlenkbf/noise.hpp"

namespace mlenkbf {
namespace {

bool is_symmetric(const Eigen::MatrixXd& M, double tol) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

void require_shape(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw DimensionMismatch(std::string(name) + " must be " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", got " + std::to_string(M.rows()) + "x" +
                            std::to_string(M.cols()));
  }
}

void require_symmetric(const Eigen::MatrixXd& M, const char* name) {
  if (M.size() > 0 && !is_symmetric(M, kSymmetryTolerance)) throw NotSymmetric(name);
}

double min_singular_value(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().minCoeff();
}

}  // namespace

bool LinearGaussianModel::operator==(const LinearGaussianModel& o) const {
  return spec_.A == o.spec_.A && spec_.C == o.spec_.C && spec_.R1_sqrt == o.spec_.R1_sqrt &&
         spec_.R2_sqrt == o.spec_.R2_sqrt && spec_.M0 == o.spec_.M0 && spec_.P0 == o.spec_.P0 &&
         R1_ == o.R1_ && R2_ == o.R2_ && R2_inv_ == o.R2_inv_ && S_ == o.S_;
}

LinearGaussianModel validate_model(ModelSpec spec, ValidationOptions options) {
  const Eigen::Index dx = spec.A.rows();
  const Eigen::Index dy = spec.C.rows();
  if (dx < 1 || dy < 1) throw DimensionMismatch("model dimensions must be at least 1");
  require_shape(spec.A, dx, dx, "A");
  require_shape(spec.C, dy, dx, "C");
  require_shape(spec.R1_sqrt, dx, dx, "R1_sqrt");
  require_shape(spec.R2_sqrt, dy, dy, "R2_sqrt");
  require_shape(spec.P0, dx, dx, "P0");
  if (spec.M0.size() != dx) throw DimensionMismatch("M0 must have length " + std::to_string(dx));

  require_symmetric(spec.R1_sqrt, "R1_sqrt");
  require_symmetric(spec.R2_sqrt, "R2_sqrt");
  require_symmetric(spec.P0, "P0");
  if (options.require_invertible_signal_noise &&
      min_singular_value(spec.R1_sqrt) <= kSingularityThreshold) {
    throw Singular("R1_sqrt");
  }
  if (min_singular_value(spec.R2_sqrt) <= kSingularityThreshold) throw Singular("R2_sqrt");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> p0_eig(spec.P0, Eigen::EigenvaluesOnly);
  if (p0_eig.eigenvalues().minCoeff() < -kPsdTolerance) throw NotPSD("P0");

  LinearGaussianModel model;
  model.R1_ = spec.R1_sqrt * spec.R1_sqrt;
  model.R2_ = spec.R2_sqrt * spec.R2_sqrt;
  model.R2_inv_ = model.R2_.inverse();
  model.R2_inv_ = 0.5 * (model.R2_inv_ + model.R2_inv_.transpose()).eval();
  model.CtR2inv_ = spec.C.transpose() * model.R2_inv_;
  model.S_ = model.CtR2inv_ * spec.C;
  model.S_ = 0.5 * (model.S_ + model.S_.transpose()).eval();
  model.P0_sqrt_ = sym_psd_sqrt(spec.P0);
  model.spec_ = std::move(spec);
  return model;
}

int numerical_rank(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  if (largest <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kSingularityThreshold * largest) ++rank;
  }
  return rank;
}

StabilityReport stability_report(const LinearGaussianModel& model) {
  const int dx = model.dx();
  StabilityReport report;
  const Eigen::MatrixXd sym = 0.5 * (model.A() + model.A().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  report.mu_A = eig.eigenvalues().maxCoeff();

  // [R1^{1/2}, A R1^{1/2}, ..., A^{dx-1} R1^{1/2}] and [C; CA; ...; CA^{dx-1}]
  Eigen::MatrixXd ctrb(dx, dx * dx);
  Eigen::MatrixXd obsv(model.dy() * dx, dx);
  Eigen::MatrixXd block = model.R1_sqrt();
  Eigen::MatrixXd row_block = model.C();
  for (int k = 0; k < dx; ++k) {
    ctrb.middleCols(k * dx, dx) = block;
    obsv.middleRows(k * model.dy(), model.dy()) = row_block;
    // Rescaling a block leaves the Krylov span unchanged and keeps A^k bounded.
    block = model.A() * block;
    block /= std::max(block.norm(), 1e-300);
    row_block = row_block * model.A();
    row_block /= std::max(row_block.norm(), 1e-300);
  }
  report.controllability_rank = numerical_rank(ctrb);
  report.observability_rank = numerical_rank(obsv);
  report.satisfies_assumptions = report.mu_A < 0.0 && report.controllability_rank == dx &&
                                 report.observability_rank == dx;
  return report;
}

Eigen::MatrixXd sym_psd_sqrt(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || (M.size() > 0 && !is_symmetric(M, 1e-10))) throw NotSymmetric("M");
  if (M.size() == 0) return M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd Q = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (Q + Q.transpose());
}

LinearGaussianModel random_model(int dx, int dy, std::uint64_t seed) {
  if (dx < 1 || dy < 1) throw DimensionMismatch("random_model dimensions must be at least 1");
  const PhiloxKey key{static_cast<std::uint32_t>(mix64(seed)),
                      static_cast<std::uint32_t>(mix64(seed) >> 32)};
  PhiloxEngine engine(key, static_cast<std::uint32_t>(NoiseRole::model), 0, 0);
  boost::random::normal_distribution<double> normal;
  auto fill = [&](Eigen::MatrixXd& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = normal(engine);
  };

  ModelSpec spec;
  spec.A.resize(dx, dx);
  spec.C.resize(dy, dx);
  Eigen::MatrixXd B1(dx, dx), B2(dy, dy);
  fill(spec.A);
  fill(spec.C);
  fill(B1);
  fill(B2);
  // O(1) spectra independent of dimension.
  spec.A /= std::sqrt(static_cast<double>(dx));
  spec.C /= std::sqrt(static_cast<double>(dx));

  const Eigen::MatrixXd sym = 0.5 * (spec.A + spec.A.transpose());
  const double mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
                        .eigenvalues()
                        .maxCoeff();
  if (mu >= -0.5) spec.A -= (mu + 0.5) * Eigen::MatrixXd::Identity(dx, dx);

  Eigen::MatrixXd R1 = B1 * B1.transpose() / dx + 0.1 * Eigen::MatrixXd::Identity(dx, dx);
  Eigen::MatrixXd R2 = B2 * B2.transpose() / dy + Eigen::MatrixXd::Identity(dy, dy);
  spec.R1_sqrt = sym_psd_sqrt(0.5 * (R1 + R1.transpose()));
  spec.R2_sqrt = sym_psd_sqrt(0.5 * (R2 + R2.transpose()));
  spec.M0 = Eigen::VectorXd::Constant(dx, 6.0);
  spec.P0 = Eigen::MatrixXd::Identity(dx, dx);
  return validate_model(std::move(spec));
}

LinearGaussianModel scalar_ou_model() {
  ModelSpec spec;
  spec.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  spec.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  spec.R1_sqrt = Eigen::MatrixXd::Constant(1, 1, 0.5);
  spec.R2_sqrt = Eigen::MatrixXd::Constant(1, 1, 2.0);
  spec.M0 = Eigen::VectorXd::Constant(1, 6.0);
  spec.P0 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return validate_model(std::move(spec));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string("'") + name + "' must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string("'") + name + "' has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row.at(c).get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw ConfigError(std::string("'") + name + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

nlohmann::json model_to_json(const LinearGaussianModel& model) {
  nlohmann::json j;
  j["d_x"] = model.dx();
  j["d_y"] = model.dy();
  j["A"] = matrix_to_json(model.A());
  j["C"] = matrix_to_json(model.C());
  j["R1_sqrt"] = matrix_to_json(model.R1_sqrt());
  j["R2_sqrt"] = matrix_to_json(model.R2_sqrt());
  j["M0"] = std::vector<double>(model.M0().data(), model.M0().data() + model.M0().size());
  j["P0"] = matrix_to_json(model.P0());
  return j;
}

LinearGaussianModel model_from_json(const nlohmann::json& j) {
  for (const char* key : {"A", "C", "R1_sqrt", "R2_sqrt", "M0", "P0"}) {
    if (!j.contains(key)) throw ConfigError(std::string("model is missing key '") + key + "'");
  }
  ModelSpec spec;
  spec.A = matrix_from_json(j["A"], "A");
  spec.C = matrix_from_json(j["C"], "C");
  spec.R1_sqrt = matrix_from_json(j["R1_sqrt"], "R1_sqrt");
  spec.R2_sqrt = matrix_from_json(j["R2_sqrt"], "R2_sqrt");
  spec.M0 = vector_from_json(j["M0"], "M0");
  spec.P0 = matrix_from_json(j["P0"], "P0");
  if (j.contains("d_x") && j["d_x"].get<Eigen::Index>() != spec.A.rows()) {
    throw DimensionMismatch("d_x does not match A");
  }
  if (j.contains("d_y") && j["d_y"].get<Eigen::Index>() != spec.C.rows()) {
    throw DimensionMismatch("d_y does not match C");
  }
  return validate_model(std::move(spec));
}

nlohmann::json stability_to_json(const StabilityReport& report) {
  return {{"mu_A", report.mu_A},
          {"controllability_rank", report.controllability_rank},
          {"observability_rank", report.observability_rank},
          {"satisfies_assumptions", report.satisfies_assumptions}};
}

}  // namespace mlenkbf
