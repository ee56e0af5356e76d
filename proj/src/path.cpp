#include "mlenkbf/path.hpp"

#include <ostream>
#include <string>

#include "mlenkbf/csv.hpp"
#include "mlenkbf/errors.hpp"
#include "mlenkbf/noise.hpp"

namespace mlenkbf {

Eigen::MatrixXd aggregate_increments(const Eigen::MatrixXd& increments, int from_level,
                                     int to_level) {
  if (to_level > from_level) {
    throw BadLength("cannot aggregate from level " + std::to_string(from_level) + " up to level " +
                    std::to_string(to_level));
  }
  const Eigen::Index block = Eigen::Index{1} << (from_level - to_level);
  if (increments.cols() % block != 0) {
    throw BadLength("increment count " + std::to_string(increments.cols()) +
                    " is not divisible by " + std::to_string(block));
  }
  Eigen::MatrixXd current = increments;
  for (int level = from_level; level > to_level; --level) {
    const Eigen::Index half = current.cols() / 2;
    Eigen::MatrixXd next(current.rows(), half);
    for (Eigen::Index j = 0; j < half; ++j) next.col(j) = current.col(2 * j) + current.col(2 * j + 1);
    current = std::move(next);
  }
  return current;
}

Eigen::MatrixXd PathBundle::increments_at(int level) const {
  return aggregate_increments(obs_increments, level_gen, level);
}

PathBundle generate_path(const LinearGaussianModel& model, int T, int level_gen,
                         std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  if (level_gen < 0) throw std::invalid_argument("level_gen must be non-negative");
  const int dx = model.dx();
  const int dy = model.dy();
  const long n = static_cast<long>(T) * steps_per_unit(level_gen);
  const double dt = step_size(level_gen);
  const NoiseStream stream(seed, kPathStreamTag, level_gen);

  PathBundle path;
  path.level_gen = level_gen;
  path.T = T;
  path.seed = seed;
  path.obs_increments.resize(dy, n);
  path.truth.resize(dx, n + 1);

  Eigen::VectorXd z(dx);
  stream.standard_normals(NoiseRole::truth_initial, 0, 0, {z.data(), static_cast<std::size_t>(dx)});
  Eigen::VectorXd x = model.M0() + model.P0_sqrt() * z;
  path.truth.col(0) = x;
  for (long k = 0; k < n; ++k) {
    const auto step = static_cast<std::uint64_t>(k);
    const Eigen::VectorXd dW = stream.increment(NoiseRole::truth_signal, level_gen, 0, step, dx);
    const Eigen::VectorXd dV = stream.increment(NoiseRole::truth_observation, level_gen, 0, step, dy);
    path.obs_increments.col(k) = model.C() * x * dt + model.R2_sqrt() * dV;
    x = x + model.A() * x * dt + model.R1_sqrt() * dW;
    path.truth.col(k + 1) = x;
  }
  return path;
}

void write_path_csv(std::ostream& os, const PathBundle& path) {
  const Eigen::Index dx = path.truth.rows();
  const Eigen::Index dy = path.obs_increments.rows();
  CsvWriter csv(os);
  std::vector<std::string> header{"step", "t"};
  for (Eigen::Index j = 0; j < dx; ++j) header.push_back("truth_" + std::to_string(j));
  for (Eigen::Index j = 0; j < dy; ++j) header.push_back("dY_" + std::to_string(j));
  csv.header(header);
  const double dt = step_size(path.level_gen);
  for (long k = 0; k < path.steps(); ++k) {
    csv.field(k).field(static_cast<double>(k) * dt);
    for (Eigen::Index j = 0; j < dx; ++j) csv.field(path.truth(j, k));
    for (Eigen::Index j = 0; j < dy; ++j) csv.field(path.obs_increments(j, k));
    csv.end_row();
  }
}

}  // namespace mlenkbf
