#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fmpp {

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;  // ||Theta - gamma|| / ||Theta||; 0 for single-variable solvers
  double wall_seconds = 0.0;
  int inner_iterations = 0;
};

/// Per-iteration record of a fit. Row 0 holds the initial point.
struct ConvergenceTrace {
  std::string solver;
  std::vector<TraceRow> rows;
  std::optional<std::string> warning;

  int iterations() const { return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1; }
  int total_inner_iterations() const;
  double final_objective() const { return rows.empty() ? 0.0 : rows.back().objective; }
  /// Largest increase between consecutive objective values (<= 0 if monotone).
  double max_increase() const;

  /// CSV with header: iteration,objective,primal_residual,wall_seconds,inner_iterations.
  /// Timing is omitted (written as 0) when `with_timing` is false.
  void write_csv(std::ostream& out, bool with_timing = true) const;
};

/// Called with every trace row as soon as it is recorded.
using TraceObserver = std::function<void(const TraceRow&)>;

/// Optional warm start and structural zero pattern for a fit.
struct FitOptions {
  std::optional<Eigen::MatrixXd> init;
  std::optional<Eigen::MatrixXd> mask;  // 0/1, same shape as Theta
  TraceObserver observer;
};

struct FitResult {
  Eigen::MatrixXd theta;
  ConvergenceTrace trace;
  bool converged = false;
};

}  // namespace fmpp
