#include "fmpp/model.hpp"

#include <random>

namespace fmpp {

std::string_view to_string(SolverKind s) { return s == SolverKind::Admm ? "admm" : "softmax"; }

SolverKind parse_solver(std::string_view name) {
  if (name == "admm") return SolverKind::Admm;
  if (name == "softmax") return SolverKind::Softmax;
  throw ConfigError("unknown solver '" + std::string(name) + "'");
}

InitKind parse_init(std::string_view name) {
  if (name == "zero") return InitKind::Zero;
  if (name == "uniform") return InitKind::Uniform;
  throw ConfigError("unknown init '" + std::string(name) + "'");
}

Model Model::zero(const MarkerSpace& space, const KernelSpec& kernel) {
  return Model{.space = space, .kernel = kernel, .theta = ParamMatrix(space)};
}

TrainOutput fit_model(const Dataset& train, const TrainConfig& cfg) {
  const auto& space = train.space;
  if (const auto bad = validate(train); !bad.empty()) {
    throw ConfigError("training data is invalid: sequence '" + bad.front().sequence_id + "': " +
                      bad.front().message);
  }
  KernelSpec kernel = cfg.kernel;
  if (cfg.sigma_auto) kernel.bandwidth = median_inter_event_gap(train.sequences);
  kernel.validate();
  cfg.regularization.validate();

  FeatureOptions opts{kernel, cfg.mode, {}};
  if (cfg.standardize) opts.standardizer = Standardizer::fit(train.sequences, space.profile_dim());
  const TrainingMatrix tm = build_training_matrix(train, opts);

  FitOptions fit;
  fit.observer = cfg.observer;
  if (cfg.within_dimension_only) fit.mask = within_dimension_mask(space);
  if (cfg.init == InitKind::Uniform) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd init(space.total_marker_dim(), space.feature_dim());
    for (Eigen::Index j = 0; j < init.cols(); ++j) {
      for (Eigen::Index i = 0; i < init.rows(); ++i) init(i, j) = unif(rng);
    }
    fit.init = std::move(init);
  }

  FitResult res;
  if (cfg.solver == SolverKind::Admm) {
    res = admm_fit(tm, cfg.regularization, cfg.admm, fit);
  } else {
    res = softmax_fit(tm, SoftmaxFitConfig{cfg.softmax, cfg.regularization}, fit);
  }

  TrainOutput out{
      Model{.space = space,
            .kernel = kernel,
            .mode = cfg.mode,
            .within_dimension_only = cfg.within_dimension_only,
            .standardizer = std::move(opts.standardizer),
            .regularization = cfg.regularization,
            .theta = ParamMatrix(space, res.theta),
            .info = {}},
      std::move(res.trace)};
  out.model.info = TrainingInfo{std::string(to_string(cfg.solver)), out.trace.iterations(),
                                out.trace.total_inner_iterations(),
                                regularized_objective(res.theta, tm, cfg.regularization), res.converged};
  return out;
}

}  // namespace fmpp
