#pragma once

// Proximal operators, FISTA with backtracking, and the ADMM splitting of
// the sparse-group objective:
//
//   Theta-step  argmin L(Theta) + l1|Theta|_1 + (u/2)||Theta - gamma - beta/u||^2   (FISTA)
//   gamma-step  gamma_j = shrink_group((Theta - beta/u)_j, l2/u)                       (per column)
//   beta-step   beta   -= u (Theta - gamma)

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fmpp/objective.hpp"
#include "fmpp/trace.hpp"

namespace fmpp {

/// sign(r) * max(0, |r| - threshold), componentwise.
Eigen::VectorXd shrink_l1(const Eigen::Ref<const Eigen::VectorXd>& r, double threshold);

/// r / ||r|| * max(0, ||r|| - threshold); zero inside the ball (and for r = 0).
Eigen::VectorXd shrink_group(const Eigen::Ref<const Eigen::VectorXd>& r, double threshold);

void shrink_l1_inplace(Eigen::Ref<Eigen::MatrixXd> x, double threshold);
/// shrink_group applied to every column.
void shrink_columns_inplace(Eigen::Ref<Eigen::MatrixXd> x, double threshold);

struct FistaConfig {
  double initial_step = 1.0;  // first trial step t
  double backtrack = 0.8;     // eta
  double tolerance = 0.01;    // on ||x_i - x_{i-1}|| / ||x_i||
  int max_iterations = 200;

  void validate() const;
};

/// Value of a smooth function; also writes its gradient when `grad` is non-null.
using SmoothOracle = std::function<double(const Eigen::MatrixXd& x, Eigen::MatrixXd* grad)>;

/// A non-smooth term with a closed-form prox: `prox(x, step)` replaces x by
/// argmin_z step * h(z) + ||z - x||^2 / 2.
struct ProximalTerm {
  std::function<void(Eigen::MatrixXd& x, double step)> prox;
  std::function<double(const Eigen::MatrixXd& x)> value;
};

struct FistaResult {
  Eigen::MatrixXd solution;
  int iterations = 0;
  int backtracks = 0;
  double step = 0.0;        // last accepted step
  double objective = 0.0;   // smooth + non-smooth at the solution
  bool converged = false;
  std::vector<double> objective_history;  // one per accepted iterate, starting at init
  std::vector<double> seconds_history;    // wall time at each entry of objective_history
};

/// Accelerated proximal gradient with backtracking on the smooth part and
/// monotone acceptance: an iterate that would raise the composite objective
/// is not accepted, though it still drives the momentum sequence.
/// Throws NumericError on a non-finite oracle value at an extrapolated point
/// and StagnationError when the step falls below 1e-12.
/// `on_iterate(i, objective, seconds)` sees every entry of the objective history.
FistaResult accelerated_proximal_gradient(const Eigen::MatrixXd& init, const SmoothOracle& smooth,
                                          const ProximalTerm& term, const FistaConfig& cfg,
                                          const Eigen::MatrixXd* mask = nullptr,
                                          const std::function<void(int, double, double)>& on_iterate = {});

/// FISTA for smooth(x) + l1 * ||x||_1.
FistaResult fista_solve(const Eigen::MatrixXd& init, const SmoothOracle& smooth, double l1,
                        const FistaConfig& cfg, const Eigen::MatrixXd* mask = nullptr);

struct AdmmState {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd beta;
  double penalty = 1.0;  // u
  int iteration = 0;
};

/// gamma = column-wise shrink_group(theta - beta/u, l2/u).
Eigen::MatrixXd admm_gamma_update(const AdmmState& state, double l2);

struct AdmmConfig {
  double penalty = 1.0;
  FistaConfig inner;
  double tolerance = 0.01;
  int max_outer = 500;

  void validate() const;
};

/// Sparse-group fit by ADMM with FISTA inner solves, starting from
/// (Theta, gamma, beta) = (init or 0, 0, 0). Stops once both the relative
/// change of Theta and the relative primal residual drop below tolerance.
FitResult admm_fit(const TrainingMatrix& tm, const RegularizationSpec& reg, const AdmmConfig& cfg,
                   const FitOptions& options = {});

}  // namespace fmpp
