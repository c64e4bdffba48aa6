#pragma once

// A trained model and the training entry point shared by the CLI and
// cross-validation.

#include <cstdint>
#include <string>

#include "fmpp/core.hpp"
#include "fmpp/features.hpp"
#include "fmpp/kernels.hpp"
#include "fmpp/objective.hpp"
#include "fmpp/prox.hpp"
#include "fmpp/softmax_solver.hpp"
#include "fmpp/trace.hpp"

namespace fmpp {

enum class SolverKind { Admm, Softmax };
enum class InitKind { Zero, Uniform };

std::string_view to_string(SolverKind s);
SolverKind parse_solver(std::string_view name);
InitKind parse_init(std::string_view name);

struct TrainingInfo {
  std::string solver;
  int iterations = 0;
  int inner_iterations = 0;
  double final_objective = 0.0;
  bool converged = false;
};

struct Model {
  MarkerSpace space;
  KernelSpec kernel;
  FeatureMode mode = FeatureMode::History;
  bool within_dimension_only = false;
  Standardizer standardizer;
  RegularizationSpec regularization;
  ParamMatrix theta;
  TrainingInfo info;

  /// The untrained (uniform) model.
  static Model zero(const MarkerSpace& space, const KernelSpec& kernel = {});

  FeatureOptions feature_options() const { return {kernel, mode, standardizer}; }
};

struct TrainConfig {
  SolverKind solver = SolverKind::Softmax;
  KernelSpec kernel;
  bool sigma_auto = false;  // MCP bandwidth := median inter-event gap of the training data
  FeatureMode mode = FeatureMode::History;
  bool within_dimension_only = false;
  bool standardize = true;
  RegularizationSpec regularization;
  AdmmConfig admm;
  FistaConfig softmax = SoftmaxFitConfig{}.optimizer;
  InitKind init = InitKind::Zero;
  std::uint64_t seed = 0;  // for InitKind::Uniform
  TraceObserver observer;
};

struct TrainOutput {
  Model model;
  ConvergenceTrace trace;
};

/// Fits a model on `train`. Standardization and the automatic bandwidth are
/// estimated from `train` only.
TrainOutput fit_model(const Dataset& train, const TrainConfig& cfg);

}  // namespace fmpp
