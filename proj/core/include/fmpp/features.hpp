#pragma once

// History-dependent feature vectors and the decoupled intensities.
//
// A feature vector has the column layout of ParamMatrix:
//   [ x0 * h(t) | sum_i 1{m_i1 = k} g(t, t_i) for k in dim 1 | ... | dim Z ]
// so that the intensity of value k in dimension z is exp(Theta_z[k] . f).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/core.hpp"
#include "fmpp/kernels.hpp"

namespace fmpp {

enum class FeatureMode {
  History,       // decayed sums over the whole history
  CurrentState,  // plain-LR baseline: raw profile and indicators of the last event only
};

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view name);

/// Per-coordinate z-scoring of profile vectors. An empty standardizer is
/// the identity.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  bool empty() const { return mean.empty(); }
  /// Mean and (population) standard deviation over the given sequences.
  /// Coordinates with zero spread get scale 1.
  static Standardizer fit(std::span<const EventSequence> sequences, int profile_dim);
  double apply(std::size_t j, double x) const {
    return empty() ? x : (x - mean[j]) / scale[j];
  }
};

struct FeatureOptions {
  KernelSpec kernel;
  FeatureMode mode = FeatureMode::History;
  Standardizer standardizer;
};

struct FeatureVector {
  Eigen::VectorXd values;
  double t = 0.0;
  std::string sequence_id;
};

/// Writes the feature vector of `seq` at time t, using the events with
/// index < history_end as history, into `out` (length feature_dim()).
/// Throws DomainError when t precedes a history event.
void build_features_into(const EventSequence& seq, const MarkerSpace& space,
                         const FeatureOptions& opts, double t, std::size_t history_end,
                         Eigen::Ref<Eigen::VectorXd> out);

FeatureVector build_features(const EventSequence& seq, const MarkerSpace& space,
                             const FeatureOptions& opts, double t, std::size_t history_end);

FeatureVector build_features(const EventSequence& seq, const MarkerSpace& space,
                             const KernelSpec& kernel, double t, std::size_t history_end);

/// Evaluation point used to predict event `event_index`: the time of the
/// preceding event (or the sequence start for the first event).
double prediction_time(const EventSequence& seq, std::size_t event_index);

/// Features used to predict event `event_index`: evaluated at
/// prediction_time() with events [0, event_index) as history.
FeatureVector training_features(const EventSequence& seq, const MarkerSpace& space,
                                const FeatureOptions& opts, std::size_t event_index);

/// exp(Theta_z f), elementwise. Throws NumericError naming the first
/// non-finite row.
Eigen::VectorXd intensity(const Eigen::Ref<const Eigen::MatrixXd>& block,
                          const Eigen::Ref<const Eigen::VectorXd>& features);

/// Softmax of Theta_z f over the M_z values, computed with max subtraction.
Eigen::VectorXd marker_probabilities(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                     const Eigen::Ref<const Eigen::VectorXd>& features);

/// 0/1 mask over the parameter matrix that keeps, for block z, the profile
/// columns and the columns of dimension z only. Used to fit independent
/// single-dimension models that share profile features.
Eigen::MatrixXd within_dimension_mask(const MarkerSpace& space);

}  // namespace fmpp
