#pragma once

// The discriminative log-loss over next-event markers, its gradient, and
// the sparse-group regularized objective
//
//   F(Theta) = L(Theta) + l1 * sum|Theta_ij| + l2 * sum_j ||Theta_:j||_2
//
// L is a sum (not a mean) over training rows, so regularization weights
// scale with the number of rows.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/core.hpp"
#include "fmpp/features.hpp"

namespace fmpp {

struct RegularizationSpec {
  double lambda = 0.0;
  double alpha = 0.5;

  double l1() const { return alpha * lambda; }
  double l2() const { return (1.0 - alpha) * lambda; }

  static RegularizationSpec from_weights(double l1, double l2);
  void validate() const;
};

struct RowOrigin {
  std::size_t sequence = 0;
  std::size_t event = 0;
};

/// One row per (sequence, event): the features used to predict that event
/// and its markers as targets. Rows follow sequence order, then event order.
struct TrainingMatrix {
  Eigen::MatrixXd features;        // rows x feature_dim
  Eigen::MatrixXi targets;         // rows x Z, 0-based markers
  std::vector<int> cardinalities;  // one per target column
  std::vector<RowOrigin> origins;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index feature_dim() const { return features.cols(); }
  int num_dims() const { return static_cast<int>(cardinalities.size()); }
  /// Number of rows of the parameter matrix this data fits.
  int param_rows() const;
  int block_offset(int z) const;

  /// Same features, only the targets of dimension z.
  TrainingMatrix restrict_to_dimension(int z) const;
  /// Subset of rows, in the given order.
  TrainingMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
};

TrainingMatrix build_training_matrix(const Dataset& dataset, const FeatureOptions& opts);
TrainingMatrix build_training_matrix(const Dataset& dataset, const KernelSpec& kernel);

/// L(Theta). Throws NumericError naming the first row with a non-finite term.
double loss(const Eigen::MatrixXd& theta, const TrainingMatrix& tm);
double loss(const ParamMatrix& theta, const TrainingMatrix& tm);

/// L(Theta) and, when `gradient` is non-null, its exact gradient.
/// Rows are reduced in fixed-size chunks combined pairwise, so the result
/// does not depend on the number of worker threads.
double loss_and_gradient(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                         Eigen::MatrixXd* gradient);

Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd& theta, const TrainingMatrix& tm);

double penalty(const Eigen::MatrixXd& theta, const RegularizationSpec& reg);

double regularized_objective(const Eigen::MatrixXd& theta, const TrainingMatrix& tm,
                             const RegularizationSpec& reg);

}  // namespace fmpp
