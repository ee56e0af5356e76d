#include "mlenkbf/run_record.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>

#include "mlenkbf/csv.hpp"

namespace mlenkbf {

double RunRecord::squared_error(int t) const {
  if (t < 0 || static_cast<std::size_t>(t) >= estimate.size() ||
      static_cast<std::size_t>(t) >= reference.size()) {
    throw std::out_of_range("squared_error: time index without estimate/reference");
  }
  return (estimate[static_cast<std::size_t>(t)] - reference[static_cast<std::size_t>(t)])
      .squaredNorm();
}

void write_run_csv(std::ostream& os, const RunRecord& record) {
  const Eigen::Index dx = record.estimate.empty() ? 0 : record.estimate.front().size();
  CsvWriter csv(os);
  std::vector<std::string> header{"variant", "l", "N", "seed", "t"};
  for (Eigen::Index j = 0; j < dx; ++j) header.push_back("est_" + std::to_string(j));
  header.insert(header.end(), {"cost", "wall_ms"});
  if (record.is_multilevel()) header.insert(header.end(), {"eps", "L", "cost_paper", "cost_actual"});
  csv.header(header);

  const long n_total = std::accumulate(record.N.begin(), record.N.end(), 0L);
  for (std::size_t t = 0; t < record.estimate.size(); ++t) {
    csv.field(record.variant).field(record.level).field(n_total).field(record.seed);
    csv.field(static_cast<long>(t));
    for (Eigen::Index j = 0; j < dx; ++j) csv.field(record.estimate[t](j));
    csv.field(record.cost_paper).field(record.wall_ms);
    if (record.is_multilevel()) {
      csv.field(record.eps).field(record.L).field(record.cost_paper).field(record.cost_actual);
    }
    csv.end_row();
  }
}

}  // namespace mlenkbf
