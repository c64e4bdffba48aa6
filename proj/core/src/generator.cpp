#include "fmpp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmpp/features.hpp"
#include "fmpp/io.hpp"
#include "json_util.hpp"

namespace fmpp {

namespace {

int sample_categorical(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(p.size()) - 1;
}

/// A realized duration inside interval k: uniform on bounded intervals,
/// lower + exponential(mean = midpoint - lower) on the unbounded last one.
double sample_duration(const DurationBins& bins, int k, std::mt19937_64& rng) {
  const auto kk = static_cast<std::size_t>(k);
  const double lo = bins.lower[kk];
  const double hi = bins.upper[kk];
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (std::isinf(hi)) {
    const double mean = std::max(bins.midpoints[kk] - lo, 1e-6);
    std::exponential_distribution<double> expo(1.0 / mean);
    return lo + std::max(expo(rng), 1e-9);
  }
  double d = lo + (hi - lo) * unif(rng);
  if (d <= lo) d = lo + 1e-9 * (hi - lo);
  return d;
}

}  // namespace

void GeneratorSpec::validate() const {
  kernel.validate();
  if (sequences < 0) throw ConfigError("number of sequences must be non-negative");
  if (min_length < 1 || max_length < min_length) throw ConfigError("sequence lengths need 1 <= min <= max");
  if (!(gap_rate > 0.0)) throw ConfigError("gap rate must be positive");
  if (!(active_fraction >= 0.0 && active_fraction <= 1.0)) throw ConfigError("active fraction must lie in [0, 1]");
  if (!(magnitude >= 0.0)) throw ConfigError("magnitude must be non-negative");
  if (theta && (theta->rows() != space.total_marker_dim() || theta->cols() != space.feature_dim())) {
    throw ConfigError("ground-truth theta has the wrong shape");
  }
  if (space.duration_dim()) {
    const auto& bins = *space.dimension(*space.duration_dim()).duration;
    if (bins.lower.front() < 0.0) throw ConfigError("duration intervals must be non-negative");
  }
}

GeneratedData generate(const GeneratorSpec& spec) {
  spec.validate();
  const auto& space = spec.space;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GeneratedData out{Dataset{space, {}}, {}, {}};
  const int n_cols = space.feature_dim();
  if (spec.theta) {
    out.theta = *spec.theta;
  } else {
    out.theta = Eigen::MatrixXd::Zero(space.total_marker_dim(), n_cols);
    std::vector<int> cols(static_cast<std::size_t>(n_cols));
    for (int j = 0; j < n_cols; ++j) cols[static_cast<std::size_t>(j)] = j;
    int active = static_cast<int>(std::lround(spec.active_fraction * n_cols));
    if (spec.active_fraction > 0.0) active = std::max(active, 1);
    for (int i = 0; i < active; ++i) {
      const auto pick = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n_cols - i));
      std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(pick)]);
    }
    for (int i = 0; i < active; ++i) {
      const int j = cols[static_cast<std::size_t>(i)];
      for (Eigen::Index r = 0; r < out.theta.rows(); ++r) out.theta(r, j) = spec.magnitude * normal(rng);
    }
  }
  for (int j = 0; j < n_cols; ++j) {
    if (!out.theta.col(j).isZero(0.0)) out.active_columns.push_back(j);
  }

  const ParamMatrix theta(space, out.theta);
  const FeatureOptions opts{.kernel = spec.kernel};
  const auto duration_dim = space.duration_dim();
  std::uniform_int_distribution<int> length_dist(spec.min_length, spec.max_length);
  std::exponential_distribution<double> gap_dist(spec.gap_rate);
  Eigen::VectorXd f(n_cols);

  for (int s = 0; s < spec.sequences; ++s) {
    EventSequence seq;
    seq.id = "s" + std::to_string(s + 1);
    seq.start = spec.start;
    seq.profile.resize(static_cast<std::size_t>(space.profile_dim()));
    for (auto& x : seq.profile) x = normal(rng);
    const int length = length_dist(rng);
    double next_t = spec.start + std::max(gap_dist(rng), 1e-9);
    for (int i = 0; i < length; ++i) {
      build_features_into(seq, space, opts, prediction_time(seq, static_cast<std::size_t>(i)),
                          static_cast<std::size_t>(i), f);
      Event ev;
      ev.t = next_t;
      for (int z = 0; z < space.num_dims(); ++z) {
        ev.markers.push_back(sample_categorical(marker_probabilities(theta.block(z), f), rng));
      }
      double gap = 0.0;
      if (duration_dim) {
        const auto& bins = *space.dimension(*duration_dim).duration;
        gap = sample_duration(bins, ev.markers[static_cast<std::size_t>(*duration_dim)], rng);
        ev.duration = gap;
      } else {
        gap = std::max(gap_dist(rng), 1e-9);
      }
      next_t = ev.t + gap;
      seq.events.push_back(std::move(ev));
    }
    out.dataset.sequences.push_back(std::move(seq));
  }
  return out;
}

namespace io {

GeneratorSpec parse_generator_spec(const std::string& json_text) {
  using detail::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("generator spec: ") + e.what(), 0);
  }
  try {
    GeneratorSpec spec{.space = detail::space_from_json(j.at("space"))};
    if (j.contains("kernel")) spec.kernel = detail::kernel_from_json(j.at("kernel"));
    spec.sequences = j.value("sequences", spec.sequences);
    if (j.contains("length")) {
      spec.min_length = j.at("length").value("min", spec.min_length);
      spec.max_length = j.at("length").value("max", spec.max_length);
    }
    spec.gap_rate = j.value("gap_rate", spec.gap_rate);
    spec.start = j.value("start", spec.start);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      if (t.contains("theta")) {
        spec.theta = detail::matrix_from_json(t.at("theta"), spec.space.total_marker_dim(), spec.space.feature_dim());
      }
      spec.active_fraction = t.value("active_fraction", spec.active_fraction);
      spec.magnitude = t.value("magnitude", spec.magnitude);
    }
    spec.validate();
    return spec;
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("generator spec: ") + e.what(), 0);
  }
}

GeneratorSpec load_generator_spec(const std::string& path) { return parse_generator_spec(read_file(path)); }

std::string truth_to_json(const MarkerSpace& space, const GeneratedData& data) {
  using detail::json;
  json labels = json::array();
  for (int j : data.active_columns) labels.push_back(space.column_label(j));
  json j = {{"format", "fmpp-truth"},
            {"version", 1},
            {"active_columns", data.active_columns},
            {"active_labels", labels},
            {"theta", detail::matrix_to_json(data.theta)}};
  return j.dump(1) + "\n";
}

}  // namespace io

}  // namespace fmpp
