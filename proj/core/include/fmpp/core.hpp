#pragma once

// Domain types shared by every module: marker spaces, event sequences,
// the stacked parameter matrix and the dataset container.
//
// Marker values are 0-based everywhere inside the library. The 1-based
// convention of the external file formats is applied only by the io layer.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/errors.hpp"

namespace fmpp {

/// Discretization of a continuous duration into half-open intervals
/// [lower[k], upper[k]). The last upper bound may be +infinity.
struct DurationBins {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> midpoints;

  std::size_t size() const { return midpoints.size(); }
  /// Class index of a duration, or nullopt when it falls in no interval.
  std::optional<int> classify(double duration) const;
};

struct MarkerDimension {
  std::string name;
  int cardinality = 0;
  std::vector<std::string> labels;  // empty or one per value
  std::optional<DurationBins> duration;
};

/// The Z marker dimensions with cardinalities M_1..M_Z, plus the profile
/// dimension M. Immutable once constructed; the constructor enforces the
/// invariants and throws ConfigError otherwise.
class MarkerSpace {
 public:
  MarkerSpace(std::vector<MarkerDimension> dims, int profile_dim,
              std::string time_unit = {});

  static MarkerSpace from_cardinalities(const std::vector<int>& cardinalities,
                                        int profile_dim);

  int num_dims() const { return static_cast<int>(dims_.size()); }
  int profile_dim() const { return profile_dim_; }
  int cardinality(int z) const { return dims_.at(z).cardinality; }
  std::vector<int> cardinalities() const;
  const MarkerDimension& dimension(int z) const { return dims_.at(z); }
  const std::vector<MarkerDimension>& dimensions() const { return dims_; }
  const std::string& time_unit() const { return time_unit_; }

  /// Sum of cardinalities.
  int total_marker_dim() const { return offsets_.back(); }
  /// M + sum of cardinalities; the width of a feature vector.
  int feature_dim() const { return profile_dim_ + total_marker_dim(); }
  /// Product of cardinalities. Throws OverflowError past 2^63.
  std::uint64_t coupled_dim() const;

  /// First row of block z in the stacked parameter matrix.
  int row_offset(int z) const { return offsets_.at(z); }
  /// First feature column holding indicators of dimension y.
  int column_offset(int y) const { return profile_dim_ + offsets_.at(y); }

  /// Index of the (single) duration dimension, if any.
  std::optional<int> duration_dim() const;

  /// Human-readable name of feature column j, e.g. "profile[3]" or
  /// "position=manager".
  std::string column_label(int j) const;
  /// Name of marker value k (0-based) in dimension z.
  std::string value_label(int z, int k) const;

  friend bool operator==(const MarkerSpace&, const MarkerSpace&);

 private:
  std::vector<MarkerDimension> dims_;
  int profile_dim_;
  std::string time_unit_;
  std::vector<int> offsets_;  // size Z+1
};

bool operator==(const DurationBins& a, const DurationBins& b);
bool operator==(const MarkerDimension& a, const MarkerDimension& b);

struct Event {
  double t = 0.0;
  std::vector<int> markers;  // 0-based, one per dimension
  /// Raw continuous duration behind a discretized duration marker, if known.
  std::optional<double> duration;
};

struct EventSequence {
  std::string id;
  std::vector<double> profile;
  double start = 0.0;
  std::vector<Event> events;
};

struct Dataset {
  MarkerSpace space;
  std::vector<EventSequence> sequences;

  std::size_t num_events() const;
};

struct Violation {
  std::string sequence_id;
  std::optional<std::size_t> event_index;
  std::string rule;
  std::string message;
};

/// All invariant violations in the dataset; empty iff it is well formed.
std::vector<Violation> validate(const Dataset& dataset);

struct ParamCounts {
  std::uint64_t decoupled_state = 0;  // sum M_z
  std::uint64_t coupled_state = 0;    // prod M_z
  std::uint64_t decoupled = 0;        // (sum M_z)(M + sum M_z)
  std::uint64_t coupled = 0;          // (prod M_z)(M + prod M_z)
};

/// Parameter counts of the decoupled and the coupled parameterization.
/// Throws OverflowError when the coupled count does not fit in 64 bits.
ParamCounts param_counts(const MarkerSpace& space);

/// The stacked parameter matrix: one block of M_z rows per marker
/// dimension, columns laid out as [profile | dim 1 values | ... | dim Z].
class ParamMatrix {
 public:
  explicit ParamMatrix(const MarkerSpace& space);
  ParamMatrix(const MarkerSpace& space, Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  int num_dims() const { return static_cast<int>(offsets_.size()) - 1; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }
  int row_offset(int z) const { return offsets_.at(z); }
  int block_rows(int z) const { return offsets_.at(z + 1) - offsets_.at(z); }

  /// Theta_z: the M_z rows of dimension z.
  auto block(int z) const { return values_.middleRows(row_offset(z), block_rows(z)); }
  auto block(int z) { return values_.middleRows(row_offset(z), block_rows(z)); }

 private:
  std::vector<int> offsets_;
  Eigen::MatrixXd values_;
};

}  // namespace fmpp
