#pragma once

// Direct solver for the sparse-group objective: the loss is a sum of Z
// independent softmax classifiers over the same features, so the whole
// objective is minimized by accelerated proximal gradient using the
// closed-form sparse-group prox (l1 shrinkage, then column shrinkage).

#include <Eigen/Dense>

#include "fmpp/objective.hpp"
#include "fmpp/prox.hpp"
#include "fmpp/trace.hpp"

namespace fmpp {

struct SoftmaxFitConfig {
  FistaConfig optimizer{.initial_step = 1.0, .backtrack = 0.8, .tolerance = 1e-4, .max_iterations = 1000};
  RegularizationSpec regularization;
};

/// Prox of l1*|x|_1 + l2*sum_j ||x_j||_2 (thresholds already scaled by the step).
Eigen::MatrixXd prox_sparse_group(const Eigen::MatrixXd& theta, double l1_threshold, double l2_threshold);

FitResult softmax_fit(const TrainingMatrix& tm, const SoftmaxFitConfig& cfg, const FitOptions& options = {});

}  // namespace fmpp
