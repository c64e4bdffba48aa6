#include "fmpp/features.hpp"

#include <cmath>
#include <sstream>

namespace fmpp {

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::History ? "history" : "current-state";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "history") return FeatureMode::History;
  if (name == "current-state") return FeatureMode::CurrentState;
  throw ConfigError("unknown feature mode '" + std::string(name) + "'");
}

Standardizer Standardizer::fit(std::span<const EventSequence> sequences, int profile_dim) {
  Standardizer s;
  const auto m = static_cast<std::size_t>(profile_dim);
  s.mean.assign(m, 0.0);
  s.scale.assign(m, 1.0);
  if (sequences.empty() || m == 0) return s;
  const auto n = static_cast<double>(sequences.size());
  for (const auto& seq : sequences) {
    for (std::size_t j = 0; j < m; ++j) s.mean[j] += seq.profile.at(j);
  }
  for (auto& v : s.mean) v /= n;
  std::vector<double> var(m, 0.0);
  for (const auto& seq : sequences) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = seq.profile[j] - s.mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void build_features_into(const EventSequence& seq, const MarkerSpace& space,
                         const FeatureOptions& opts, double t, std::size_t history_end,
                         Eigen::Ref<Eigen::VectorXd> out) {
  if (history_end > seq.events.size()) {
    throw DomainError("history extends past the end of sequence '" + seq.id + "'");
  }
  if (out.size() != space.feature_dim()) throw ConfigError("feature buffer has the wrong length");
  if (seq.profile.size() != static_cast<std::size_t>(space.profile_dim())) {
    throw ConfigError("profile of sequence '" + seq.id + "' has the wrong length");
  }
  if (history_end > 0 && seq.events[history_end - 1].t > t) {
    std::ostringstream msg;
    msg << "sequence '" << seq.id << "': features requested at t=" << t
        << " before history event at t=" << seq.events[history_end - 1].t;
    throw DomainError(msg.str());
  }
  out.setZero();
  const int m = space.profile_dim();

  if (opts.mode == FeatureMode::CurrentState) {
    for (int j = 0; j < m; ++j) out[j] = opts.standardizer.apply(j, seq.profile[j]);
    if (history_end > 0) {
      const auto& last = seq.events[history_end - 1];
      for (int y = 0; y < space.num_dims(); ++y) out[space.column_offset(y) + last.markers[y]] = 1.0;
    }
    return;
  }

  // t_I: latest history event strictly before t, else the sequence start.
  double reference = seq.start;
  for (std::size_t i = history_end; i-- > 0;) {
    if (seq.events[i].t < t) {
      reference = seq.events[i].t;
      break;
    }
  }
  const double h = modulation(opts.kernel, t, reference);
  for (int j = 0; j < m; ++j) out[j] = opts.standardizer.apply(j, seq.profile[j]) * h;

  for (std::size_t i = 0; i < history_end; ++i) {
    const auto& ev = seq.events[i];
    const double w = decay(opts.kernel, t, ev.t);
    for (int y = 0; y < space.num_dims(); ++y) out[space.column_offset(y) + ev.markers[y]] += w;
  }
}

FeatureVector build_features(const EventSequence& seq, const MarkerSpace& space,
                             const FeatureOptions& opts, double t, std::size_t history_end) {
  FeatureVector f{Eigen::VectorXd(space.feature_dim()), t, seq.id};
  build_features_into(seq, space, opts, t, history_end, f.values);
  return f;
}

FeatureVector build_features(const EventSequence& seq, const MarkerSpace& space,
                             const KernelSpec& kernel, double t, std::size_t history_end) {
  return build_features(seq, space, FeatureOptions{.kernel = kernel}, t, history_end);
}

double prediction_time(const EventSequence& seq, std::size_t event_index) {
  return event_index == 0 ? seq.start : seq.events.at(event_index - 1).t;
}

FeatureVector training_features(const EventSequence& seq, const MarkerSpace& space,
                                const FeatureOptions& opts, std::size_t event_index) {
  return build_features(seq, space, opts, prediction_time(seq, event_index), event_index);
}

Eigen::VectorXd intensity(const Eigen::Ref<const Eigen::MatrixXd>& block,
                          const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (block.cols() != features.size()) throw ConfigError("parameter block and feature vector disagree");
  Eigen::VectorXd out = (block * features).array().exp().matrix();
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (!std::isfinite(out[k]) || out[k] <= 0.0) {
      throw NumericError("intensity of row " + std::to_string(k) + " is not a positive finite number");
    }
  }
  return out;
}

Eigen::VectorXd marker_probabilities(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                     const Eigen::Ref<const Eigen::VectorXd>& features) {
  if (block.cols() != features.size()) throw ConfigError("parameter block and feature vector disagree");
  Eigen::VectorXd logits = block * features;
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) {
      throw NumericError("logit of row " + std::to_string(k) + " is not finite");
    }
  }
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp().matrix();
  p /= p.sum();
  return p;
}

Eigen::MatrixXd within_dimension_mask(const MarkerSpace& space) {
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(space.total_marker_dim(), space.feature_dim());
  for (int z = 0; z < space.num_dims(); ++z) {
    auto rows = mask.middleRows(space.row_offset(z), space.cardinality(z));
    rows.leftCols(space.profile_dim()).setOnes();
    rows.middleCols(space.column_offset(z), space.cardinality(z)).setOnes();
  }
  return mask;
}

}  // namespace fmpp
