#pragma once

// Synthetic factorial event data. Markers are drawn from the model's own
// conditional distribution given the history, so a dataset generated from
// Theta is exactly the distribution the learners fit.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/core.hpp"
#include "fmpp/kernels.hpp"

namespace fmpp {

struct GeneratorSpec {
  MarkerSpace space;
  KernelSpec kernel;
  std::optional<Eigen::MatrixXd> theta;  // ground truth; sampled when absent
  double active_fraction = 0.2;          // share of columns with non-zero truth
  double magnitude = 1.0;                // std-dev of active entries
  int sequences = 100;
  int min_length = 1;
  int max_length = 10;
  double gap_rate = 1.0;  // exponential inter-arrival rate when no duration dimension
  double start = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedData {
  Dataset dataset;
  Eigen::MatrixXd theta;
  std::vector<int> active_columns;  // ascending
};

GeneratedData generate(const GeneratorSpec& spec);

namespace io {
GeneratorSpec parse_generator_spec(const std::string& json_text);
GeneratorSpec load_generator_spec(const std::string& path);
/// Ground-truth sidecar: theta and its active-column support.
std::string truth_to_json(const MarkerSpace& space, const GeneratedData& data);
}  // namespace io

}  // namespace fmpp
