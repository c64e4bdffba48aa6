#include "fmpp/softmax_solver.hpp"

namespace fmpp {

Eigen::MatrixXd prox_sparse_group(const Eigen::MatrixXd& theta, double l1_threshold, double l2_threshold) {
  if (l1_threshold < 0.0 || l2_threshold < 0.0) throw DomainError("shrinkage thresholds must be non-negative");
  Eigen::MatrixXd out = theta;
  shrink_l1_inplace(out, l1_threshold);
  shrink_columns_inplace(out, l2_threshold);
  return out;
}

FitResult softmax_fit(const TrainingMatrix& tm, const SoftmaxFitConfig& cfg, const FitOptions& options) {
  const auto& reg = cfg.regularization;
  reg.validate();
  const Eigen::Index rows = tm.param_rows();
  const Eigen::Index cols = tm.feature_dim();
  Eigen::MatrixXd init = options.init ? *options.init : Eigen::MatrixXd::Zero(rows, cols);
  if (init.rows() != rows || init.cols() != cols) throw ConfigError("initial parameter matrix has the wrong shape");

  const double l1 = reg.l1();
  const double l2 = reg.l2();
  ProximalTerm term{
      [l1, l2](Eigen::MatrixXd& x, double step) {
        shrink_l1_inplace(x, l1 * step);
        shrink_columns_inplace(x, l2 * step);
      },
      [&reg](const Eigen::MatrixXd& x) { return penalty(x, reg); }};
  SmoothOracle smooth = [&tm](const Eigen::MatrixXd& x, Eigen::MatrixXd* grad) {
    return loss_and_gradient(x, tm, grad);
  };

  std::function<void(int, double, double)> forward;
  if (options.observer) {
    forward = [&options](int i, double objective, double seconds) {
      options.observer(TraceRow{i, objective, 0.0, seconds, i == 0 ? 0 : 1});
    };
  }
  FistaResult res = accelerated_proximal_gradient(init, smooth, term, cfg.optimizer,
                                                  options.mask ? &*options.mask : nullptr, forward);

  FitResult out;
  out.trace.solver = "softmax";
  const auto n = res.objective_history.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.trace.rows.push_back(
        {static_cast<int>(i), res.objective_history[i], 0.0, res.seconds_history[i], i == 0 ? 0 : 1});
  }
  out.theta = std::move(res.solution);
  out.converged = res.converged;
  return out;
}

}  // namespace fmpp
