#include "fmpp/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

namespace fmpp {

int ConvergenceTrace::total_inner_iterations() const {
  int total = 0;
  for (const auto& r : rows) total += r.inner_iterations;
  return total;
}

double ConvergenceTrace::max_increase() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    worst = std::max(worst, rows[i].objective - rows[i - 1].objective);
  }
  return rows.size() < 2 ? 0.0 : worst;
}

void ConvergenceTrace::write_csv(std::ostream& out, bool with_timing) const {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << "iteration,objective,primal_residual,wall_seconds,inner_iterations\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.objective << ',' << r.primal_residual << ','
        << (with_timing ? r.wall_seconds : 0.0) << ',' << r.inner_iterations << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace fmpp
