#include "fmpp/prox.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <sstream>

namespace fmpp {

namespace {

constexpr double kNormFloor = 1e-12;
constexpr double kMinStep = 1e-12;
constexpr int kDivergenceWindow = 10;

double relative_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
  return (next - prev).norm() / std::max(next.norm(), kNormFloor);
}

void apply_mask(Eigen::MatrixXd& x, const Eigen::MatrixXd* mask) {
  if (mask) x.array() *= mask->array();
}

}  // namespace

Eigen::VectorXd shrink_l1(const Eigen::Ref<const Eigen::VectorXd>& r, double threshold) {
  if (threshold < 0.0) throw DomainError("shrinkage threshold must be non-negative");
  Eigen::VectorXd out = r;
  shrink_l1_inplace(out, threshold);
  return out;
}

Eigen::VectorXd shrink_group(const Eigen::Ref<const Eigen::VectorXd>& r, double threshold) {
  if (threshold < 0.0) throw DomainError("shrinkage threshold must be non-negative");
  const double norm = r.norm();
  if (norm <= threshold || norm == 0.0) return Eigen::VectorXd::Zero(r.size());
  return r * ((norm - threshold) / norm);
}

void shrink_l1_inplace(Eigen::Ref<Eigen::MatrixXd> x, double threshold) {
  if (threshold <= 0.0) return;
  x = x.unaryExpr([threshold](double v) {
    const double a = std::abs(v) - threshold;
    return a > 0.0 ? std::copysign(a, v) : 0.0;
  });
}

void shrink_columns_inplace(Eigen::Ref<Eigen::MatrixXd> x, double threshold) {
  if (threshold <= 0.0) return;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    const double norm = col.norm();
    if (norm <= threshold) {
      col.setZero();
    } else {
      col *= (norm - threshold) / norm;
    }
  }
}

void FistaConfig::validate() const {
  if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtracking factor must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iterations < 0) throw ConfigError("max iterations must be non-negative");
}

void AdmmConfig::validate() const {
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw ConfigError("ADMM penalty u must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_outer < 0) throw ConfigError("max outer iterations must be non-negative");
  inner.validate();
}

FistaResult accelerated_proximal_gradient(const Eigen::MatrixXd& init, const SmoothOracle& smooth,
                                          const ProximalTerm& term, const FistaConfig& cfg,
                                          const Eigen::MatrixXd* mask,
                                          const std::function<void(int, double, double)>& on_iterate) {
  cfg.validate();
  if (mask && (mask->rows() != init.rows() || mask->cols() != init.cols())) {
    throw ConfigError("mask shape differs from the parameter shape");
  }
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  FistaResult res;
  Eigen::MatrixXd x = init;
  apply_mask(x, mask);
  double fx = smooth(x, nullptr);
  if (!std::isfinite(fx)) throw NumericError("smooth objective is not finite at the initial point");
  double composite = fx + term.value(x);
  res.objective_history.push_back(composite);
  res.seconds_history.push_back(elapsed());
  if (on_iterate) on_iterate(0, composite, res.seconds_history.back());

  Eigen::MatrixXd v = x;
  Eigen::MatrixXd y, grad, z;
  double step = cfg.initial_step;

  for (int i = 1; i <= cfg.max_iterations; ++i) {
    const double tau = 2.0 / (i + 1.0);
    y = (1.0 - tau) * x + tau * v;
    const double fy = smooth(y, &grad);
    if (!std::isfinite(fy) || !grad.allFinite()) {
      throw NumericError("smooth objective or gradient is not finite at iteration " + std::to_string(i));
    }
    double fz = 0.0;
    while (true) {
      z = y - step * grad;
      term.prox(z, step);
      apply_mask(z, mask);
      try {
        fz = smooth(z, nullptr);
      } catch (const NumericError&) {
        fz = std::numeric_limits<double>::infinity();
      }
      const Eigen::MatrixXd d = z - y;
      const double bound = fy + (grad.array() * d.array()).sum() + d.squaredNorm() / (2.0 * step);
      if (std::isfinite(fz) && fz <= bound + 1e-12 * std::max(1.0, std::abs(fy))) break;
      step *= cfg.backtrack;
      ++res.backtracks;
      if (step < kMinStep) {
        std::ostringstream msg;
        msg << "line search stagnated at iteration " << i << " (step " << step << ")";
        throw StagnationError(msg.str());
      }
    }
    v = x + (z - x) / tau;
    const double change = relative_change(z, x);
    const double fz_composite = fz + term.value(z);
    if (fz_composite <= composite) {
      x = z;
      composite = fz_composite;
    }
    res.objective_history.push_back(composite);
    res.seconds_history.push_back(elapsed());
    if (on_iterate) on_iterate(i, composite, res.seconds_history.back());
    res.iterations = i;
    if (change < cfg.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.solution = std::move(x);
  res.step = step;
  res.objective = composite;
  return res;
}

FistaResult fista_solve(const Eigen::MatrixXd& init, const SmoothOracle& smooth, double l1,
                        const FistaConfig& cfg, const Eigen::MatrixXd* mask) {
  if (l1 < 0.0) throw ConfigError("l1 weight must be non-negative");
  ProximalTerm term{
      [l1](Eigen::MatrixXd& x, double step) { shrink_l1_inplace(x, l1 * step); },
      [l1](const Eigen::MatrixXd& x) { return l1 > 0.0 ? l1 * x.cwiseAbs().sum() : 0.0; }};
  return accelerated_proximal_gradient(init, smooth, term, cfg, mask);
}

Eigen::MatrixXd admm_gamma_update(const AdmmState& state, double l2) {
  if (!(state.penalty > 0.0)) throw ConfigError("ADMM penalty u must be positive");
  Eigen::MatrixXd nu = state.theta - state.beta / state.penalty;
  shrink_columns_inplace(nu, l2 / state.penalty);
  return nu;
}

FitResult admm_fit(const TrainingMatrix& tm, const RegularizationSpec& reg, const AdmmConfig& cfg,
                   const FitOptions& options) {
  reg.validate();
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  const Eigen::Index rows = tm.param_rows();
  const Eigen::Index cols = tm.feature_dim();
  const Eigen::MatrixXd* mask = options.mask ? &*options.mask : nullptr;

  AdmmState state;
  state.penalty = cfg.penalty;
  state.theta = options.init ? *options.init : Eigen::MatrixXd::Zero(rows, cols);
  if (state.theta.rows() != rows || state.theta.cols() != cols) {
    throw ConfigError("initial parameter matrix has the wrong shape");
  }
  apply_mask(state.theta, mask);
  state.gamma = Eigen::MatrixXd::Zero(rows, cols);
  state.beta = Eigen::MatrixXd::Zero(rows, cols);

  FitResult result;
  result.trace.solver = "admm";
  auto residual = [&] {
    return (state.theta - state.gamma).norm() / std::max(state.theta.norm(), kNormFloor);
  };
  result.trace.rows.push_back({0, regularized_objective(state.theta, tm, reg), residual(), elapsed(), 0});
  if (options.observer) options.observer(result.trace.rows.back());

  const double u = cfg.penalty;
  FistaConfig inner = cfg.inner;
  int rising = 0;
  Eigen::MatrixXd center;
  for (int k = 1; k <= cfg.max_outer; ++k) {
    center = state.gamma + state.beta / u;
    SmoothOracle g = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd* grad) {
      const Eigen::MatrixXd diff = x - center;
      const double value = loss_and_gradient(x, tm, grad) + 0.5 * u * diff.squaredNorm();
      if (grad) *grad += u * diff;
      return value;
    };
    FistaResult sub = fista_solve(state.theta, g, reg.l1(), inner, mask);
    inner.initial_step = sub.step;

    const Eigen::MatrixXd previous = std::move(state.theta);
    state.theta = std::move(sub.solution);
    state.gamma = admm_gamma_update(state, reg.l2());
    state.beta -= u * (state.theta - state.gamma);
    state.iteration = k;

    const double change = relative_change(state.theta, previous);
    const double res = residual();
    const double obj = regularized_objective(state.theta, tm, reg);
    rising = obj >= result.trace.rows.back().objective ? rising + 1 : 0;
    if (rising >= kDivergenceWindow && !result.trace.warning) {
      result.trace.warning = "objective did not decrease for " + std::to_string(kDivergenceWindow) +
                             " consecutive outer iterations (ending at " + std::to_string(k) + ")";
    }
    result.trace.rows.push_back({k, obj, res, elapsed(), sub.iterations});
    if (options.observer) options.observer(result.trace.rows.back());
    if (change < cfg.tolerance && res < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  // Theta carries the l1 sparsity, gamma the group sparsity; columns that
  // gamma zeroes out are dropped from the returned parameters.
  for (Eigen::Index j = 0; j < cols && state.iteration > 0; ++j) {
    if (reg.l2() > 0.0 && state.gamma.col(j).isZero(0.0)) state.theta.col(j).setZero();
  }
  result.theta = std::move(state.theta);
  return result;
}

}  // namespace fmpp
