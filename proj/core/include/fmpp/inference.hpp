#pragma once

// Next-event prediction and evaluation metrics.
//
// Ties in every ranking are broken towards the lowest marker index (and,
// for joint tuples, the lexicographically smallest tuple).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/model.hpp"

namespace fmpp {

struct RankedMarker {
  int marker = 0;  // 0-based
  double probability = 0.0;
};

struct JointCandidate {
  std::vector<int> markers;  // 0-based, one per dimension
  double probability = 0.0;
};

struct Prediction {
  std::vector<Eigen::VectorXd> probabilities;     // per dimension
  std::vector<int> argmax;                        // per dimension
  std::vector<std::vector<RankedMarker>> ranked;  // per dimension, top-K
  std::vector<JointCandidate> joint;              // top-K tuples by product probability
};

/// Ranks the values of one dimension; returns the top k (all when k <= 0).
std::vector<RankedMarker> rank_markers(const Eigen::VectorXd& probabilities, int k);

/// The k most probable marker tuples under independence across dimensions.
std::vector<JointCandidate> top_joint(const std::vector<Eigen::VectorXd>& probabilities, int k);

/// Prediction from a prebuilt feature vector.
Prediction predict_from_features(const Model& model, const Eigen::VectorXd& features, int k);

/// Predicts the next event of `seq` at time t using its whole history.
/// Throws ConfigError on a dimension mismatch and DomainError when t
/// precedes the last event.
Prediction predict_next(const Model& model, const EventSequence& seq, double t, int k);

/// predict_next evaluated at the last event time (the sequence start when empty).
Prediction predict_after_last_event(const Model& model, const EventSequence& seq, int k);

struct EvalReport {
  std::size_t events = 0;
  std::vector<double> accuracy;              // per dimension
  double joint_accuracy = 0.0;
  std::vector<std::vector<double>> top_k;    // [dimension][K-1], K = 1..k_max
  std::vector<double> joint_top_k;           // [K-1]
  std::optional<double> duration_mse;
  std::size_t duration_events = 0;
};

/// Scores the model on every event of every sequence, predicting event i
/// from events [0, i) at the time of event i-1. Throws ConfigError for an
/// empty test set or a mismatched marker space.
EvalReport evaluate(const Model& model, const Dataset& test, int k_max = 5);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across folds
};

struct CrossValidationReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<EvalReport> per_fold;
  std::vector<MetricSummary> accuracy;
  MetricSummary joint_accuracy;
  std::vector<std::vector<MetricSummary>> top_k;
  std::vector<MetricSummary> joint_top_k;
  std::optional<MetricSummary> duration_mse;
};

/// Fold index of every sequence: a seeded shuffle dealt round-robin.
std::vector<int> assign_folds(std::size_t sequences, int folds, std::uint64_t seed);

/// Sequence-level k-fold cross validation. Folds run on up to `jobs`
/// threads; the report does not depend on `jobs`.
CrossValidationReport cross_validate(const Dataset& dataset, int folds, const TrainConfig& cfg,
                                     std::uint64_t seed, int k_max = 5, int jobs = 1);

struct ColumnStat {
  int column = 0;
  std::string label;
  double norm = 0.0;
  bool active = false;  // norm > 1e-8
};

/// Column norms of Theta, sorted by decreasing norm (ties by column index).
std::vector<ColumnStat> inspect_sparsity(const Model& model);

}  // namespace fmpp
