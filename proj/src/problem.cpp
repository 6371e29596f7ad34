#include "fidhvi/problem.hpp"

#include <cmath>

#include "fidhvi/errors.hpp"

namespace fidhvi {

void ProblemSpec::validate() const {
  if (!(order > 0.0 && order <= 1.0)) {
    throw DomainError("ProblemSpec " + name + ": order must lie in (0, 1]");
  }
  if (z0.size() < 1 || !z0.allFinite()) {
    throw DomainError("ProblemSpec " + name + ": z0 must be a finite nonempty vector");
  }
  if (!f.eval || !g.eval || !a.apply || !j.value || !j.subgradient) {
    throw DomainError("ProblemSpec " + name + ": every map must be set");
  }
  if (impulses.size() != static_cast<std::size_t>(grid.impulse_count())) {
    throw DomainError("ProblemSpec " + name + ": need one impulse map per impulse time");
  }
  for (const auto& imp : impulses) {
    if (!imp.eval || !(imp.lipschitz >= 0.0)) {
      throw DomainError("ProblemSpec " + name + ": impulse maps need an evaluator and d_j >= 0");
    }
  }
  if (a.dim != n.cols() || j.dim != n.rows()) {
    throw DomainError("ProblemSpec " + name + ": A, N and J dimensions do not match");
  }
  if (!(f.lipschitz >= 0.0) || !(g.lipschitz >= 0.0)) {
    throw DomainError("ProblemSpec " + name + ": M1 and m_g must be nonnegative");
  }
}

ProblemSpec ProblemSpec::with_grid(TimeGrid new_grid) const {
  if (new_grid.impulse_times() != grid.impulse_times()) {
    throw DomainError("ProblemSpec::with_grid: impulse times must be unchanged");
  }
  ProblemSpec copy = *this;
  copy.grid = std::move(new_grid);
  return copy;
}

}  // namespace fidhvi
