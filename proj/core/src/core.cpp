#include "fmpp/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace fmpp {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out) ||
      out > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw OverflowError("marker space size overflows 64-bit arithmetic");
  }
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("marker space size overflows 64-bit arithmetic");
  }
  return out;
}

void check_bins(const MarkerDimension& dim) {
  const auto& bins = *dim.duration;
  const auto n = static_cast<std::size_t>(dim.cardinality);
  if (bins.midpoints.size() != n || bins.lower.size() != n || bins.upper.size() != n) {
    throw ConfigError("duration dimension '" + dim.name +
                      "' needs one interval and one midpoint per value");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(bins.lower[k] < bins.upper[k])) {
      throw ConfigError("duration interval " + std::to_string(k + 1) + " of '" +
                        dim.name + "' is empty");
    }
    if (k > 0 && !(bins.midpoints[k] > bins.midpoints[k - 1])) {
      throw ConfigError("duration midpoints of '" + dim.name +
                        "' must be strictly increasing");
    }
    if (k > 0 && bins.lower[k] < bins.upper[k - 1]) {
      throw ConfigError("duration intervals of '" + dim.name + "' overlap");
    }
  }
}

}  // namespace

std::optional<int> DurationBins::classify(double duration) const {
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (duration >= lower[k] && duration < upper[k]) return static_cast<int>(k);
  }
  return std::nullopt;
}

MarkerSpace::MarkerSpace(std::vector<MarkerDimension> dims, int profile_dim,
                         std::string time_unit)
    : dims_(std::move(dims)), profile_dim_(profile_dim), time_unit_(std::move(time_unit)) {
  if (dims_.empty()) throw ConfigError("marker space needs at least one dimension");
  if (profile_dim_ < 0) throw ConfigError("profile dimension must be non-negative");
  offsets_.assign(1, 0);
  int durations = 0;
  for (std::size_t z = 0; z < dims_.size(); ++z) {
    auto& d = dims_[z];
    if (d.name.empty()) d.name = "dim" + std::to_string(z + 1);
    if (d.cardinality < 2) {
      throw ConfigError("dimension '" + d.name + "' must have at least 2 values");
    }
    if (!d.labels.empty() && d.labels.size() != static_cast<std::size_t>(d.cardinality)) {
      throw ConfigError("dimension '" + d.name + "' has a label count that differs from its cardinality");
    }
    if (d.duration) {
      check_bins(d);
      ++durations;
    }
    if (offsets_.back() > std::numeric_limits<int>::max() - d.cardinality) {
      throw OverflowError("sum of cardinalities overflows");
    }
    offsets_.push_back(offsets_.back() + d.cardinality);
  }
  if (durations > 1) throw ConfigError("at most one duration dimension is supported");
}

MarkerSpace MarkerSpace::from_cardinalities(const std::vector<int>& cardinalities,
                                            int profile_dim) {
  std::vector<MarkerDimension> dims;
  dims.reserve(cardinalities.size());
  for (int c : cardinalities) dims.push_back(MarkerDimension{.cardinality = c});
  return MarkerSpace(std::move(dims), profile_dim);
}

std::vector<int> MarkerSpace::cardinalities() const {
  std::vector<int> out;
  out.reserve(dims_.size());
  for (const auto& d : dims_) out.push_back(d.cardinality);
  return out;
}

std::uint64_t MarkerSpace::coupled_dim() const {
  std::uint64_t p = 1;
  for (const auto& d : dims_) p = checked_mul(p, static_cast<std::uint64_t>(d.cardinality));
  return p;
}

std::optional<int> MarkerSpace::duration_dim() const {
  for (std::size_t z = 0; z < dims_.size(); ++z) {
    if (dims_[z].duration) return static_cast<int>(z);
  }
  return std::nullopt;
}

std::string MarkerSpace::value_label(int z, int k) const {
  const auto& d = dims_.at(z);
  if (!d.labels.empty()) return d.labels.at(k);
  return std::to_string(k + 1);
}

std::string MarkerSpace::column_label(int j) const {
  if (j < 0 || j >= feature_dim()) throw DomainError("column index out of range");
  if (j < profile_dim_) return "profile[" + std::to_string(j) + "]";
  const int m = j - profile_dim_;
  int z = 0;
  while (offsets_[z + 1] <= m) ++z;
  return dims_[z].name + "=" + value_label(z, m - offsets_[z]);
}

bool operator==(const DurationBins& a, const DurationBins& b) {
  return a.lower == b.lower && a.upper == b.upper && a.midpoints == b.midpoints;
}

bool operator==(const MarkerDimension& a, const MarkerDimension& b) {
  return a.name == b.name && a.cardinality == b.cardinality && a.labels == b.labels &&
         a.duration == b.duration;
}

bool operator==(const MarkerSpace& a, const MarkerSpace& b) {
  return a.profile_dim_ == b.profile_dim_ && a.time_unit_ == b.time_unit_ && a.dims_ == b.dims_;
}

std::size_t Dataset::num_events() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.events.size();
  return n;
}

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  const auto& space = dataset.space;
  const auto z_count = static_cast<std::size_t>(space.num_dims());
  for (const auto& seq : dataset.sequences) {
    if (seq.profile.size() != static_cast<std::size_t>(space.profile_dim())) {
      std::ostringstream msg;
      msg << "profile has " << seq.profile.size() << " entries, expected " << space.profile_dim();
      out.push_back({seq.id, std::nullopt, "profile-length", msg.str()});
    }
    for (std::size_t j = 0; j < seq.profile.size(); ++j) {
      if (!std::isfinite(seq.profile[j])) {
        out.push_back({seq.id, std::nullopt, "finite",
                       "profile entry " + std::to_string(j) + " is not finite"});
      }
    }
    if (!std::isfinite(seq.start)) {
      out.push_back({seq.id, std::nullopt, "finite", "start time is not finite"});
    }
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
      const auto& ev = seq.events[i];
      if (!std::isfinite(ev.t)) {
        out.push_back({seq.id, i, "finite", "timestamp is not finite"});
      } else if (i > 0 && !(ev.t > seq.events[i - 1].t)) {
        std::ostringstream msg;
        msg << "timestamp " << ev.t << " does not strictly follow " << seq.events[i - 1].t;
        out.push_back({seq.id, i, "time-order", msg.str()});
      }
      if (ev.markers.size() != z_count) {
        out.push_back({seq.id, i, "marker-arity",
                       "event has " + std::to_string(ev.markers.size()) + " markers, expected " +
                           std::to_string(z_count)});
        continue;
      }
      for (std::size_t z = 0; z < z_count; ++z) {
        const int m = ev.markers[z];
        const int card = space.cardinality(static_cast<int>(z));
        if (m < 0 || m >= card) {
          out.push_back({seq.id, i, "marker-range",
                         "marker " + std::to_string(m + 1) + " of dimension '" +
                             space.dimension(static_cast<int>(z)).name + "' outside [1, " +
                             std::to_string(card) + "]"});
        }
      }
      if (ev.duration && !(std::isfinite(*ev.duration) && *ev.duration >= 0.0)) {
        out.push_back({seq.id, i, "duration", "raw duration must be finite and non-negative"});
      }
    }
  }
  return out;
}

ParamCounts param_counts(const MarkerSpace& space) {
  ParamCounts c;
  c.decoupled_state = static_cast<std::uint64_t>(space.total_marker_dim());
  c.coupled_state = space.coupled_dim();
  const auto m = static_cast<std::uint64_t>(space.profile_dim());
  c.decoupled = checked_mul(c.decoupled_state, checked_add(m, c.decoupled_state));
  c.coupled = checked_mul(c.coupled_state, checked_add(m, c.coupled_state));
  return c;
}

ParamMatrix::ParamMatrix(const MarkerSpace& space)
    : ParamMatrix(space, Eigen::MatrixXd::Zero(space.total_marker_dim(), space.feature_dim())) {}

ParamMatrix::ParamMatrix(const MarkerSpace& space, Eigen::MatrixXd values)
    : values_(std::move(values)) {
  if (values_.rows() != space.total_marker_dim() || values_.cols() != space.feature_dim()) {
    std::ostringstream msg;
    msg << "parameter matrix is " << values_.rows() << "x" << values_.cols() << ", expected "
        << space.total_marker_dim() << "x" << space.feature_dim();
    throw ConfigError(msg.str());
  }
  offsets_.reserve(space.num_dims() + 1);
  for (int z = 0; z < space.num_dims(); ++z) offsets_.push_back(space.row_offset(z));
  offsets_.push_back(space.total_marker_dim());
}

}  // namespace fmpp
