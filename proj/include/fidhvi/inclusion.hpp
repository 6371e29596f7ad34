#pragma once

#include <vector>

#include "fidhvi/errors.hpp"
#include "fidhvi/functional.hpp"
#include "fidhvi/linalg.hpp"

namespace fidhvi {

struct InclusionOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  /// When set, receives ‖y_k - y_{k-1}‖ for every iteration.
  std::vector<double>* step_trace = nullptr;
};

/// y with A(t,y) + η = g and η = Nᵀξ, ξ a Clarke subgradient of J at Ny.
struct InclusionSolution {
  Vec y;
  Vec eta;
  double residual = 0.0;
  int iterations = 0;
};

class InclusionNonConvergence : public NonConvergence {
 public:
  InclusionNonConvergence(const std::string& what, InclusionSolution best)
      : NonConvergence(what, best.residual, best.iterations), best_(std::move(best)) {}
  const InclusionSolution& best() const noexcept { return best_; }

 private:
  InclusionSolution best_;
};

/// m_A - c_J ‖N‖², the strong-monotonicity margin left after the
/// nonconvex part. Throws ConstantViolation when it is not positive.
double inclusion_margin(const MonotoneOperator& a, const TraceMap& n,
                        const NonsmoothFunctional& j);

/// Reusable solver for one (A, N, J) triple; holds work buffers, so one
/// instance must not be shared between threads.
///
/// Separable J with N Nᵀ = I is handled by a forward-backward step whose
/// backward part is the exact scalar resolvent of each law; otherwise a
/// plain forward step with the selected subgradient is used.
class InclusionSolver {
 public:
  InclusionSolver(const MonotoneOperator& a, const TraceMap& n, const NonsmoothFunctional& j,
                  InclusionOptions options = {});

  InclusionSolution solve(double t, ConstVecRef g, ConstVecRef y0);

  double step() const { return lambda_; }
  bool uses_resolvent() const { return resolvent_; }
  /// Proven contraction factor of one iteration.
  double contraction() const { return contraction_; }
  /// ‖A(t,y) + η - g‖ with η the subgradient selection at Ny.
  double residual(double t, ConstVecRef g, ConstVecRef y);

 private:
  void backward(ConstVecRef v, VecRef y, VecRef eta);

  const MonotoneOperator& a_;
  const TraceMap& n_;
  const NonsmoothFunctional& j_;
  InclusionOptions options_;
  bool resolvent_ = false;
  std::vector<ScalarLaw> component_laws_;
  std::vector<bool> component_active_;
  double lambda_ = 0.0;
  double contraction_ = 1.0;
  Vec ay_, v_, next_, eta_, xi_, s_, r_;
};

InclusionSolution solve_inclusion(const MonotoneOperator& a, const TraceMap& n,
                                  const NonsmoothFunctional& j, double t, ConstVecRef g,
                                  ConstVecRef y0, InclusionOptions options = {});

/// Distance from g - A(t,y) to Nᵀ∂J(t,Ny). Exact for separable J when
/// N Nᵀ = I (the subdifferential is a box); otherwise the residual of the
/// selected subgradient, which can only overestimate it.
double inclusion_residual(const MonotoneOperator& a, const TraceMap& n,
                          const NonsmoothFunctional& j, double t, ConstVecRef g, ConstVecRef y);

/// ‖y1 - y2‖ / ‖g1 - g2‖ for the solutions with right-hand sides g1, g2.
double inner_lipschitz_ratio(const MonotoneOperator& a, const TraceMap& n,
                             const NonsmoothFunctional& j, double t, ConstVecRef g1,
                             ConstVecRef g2, InclusionOptions options = {});

/// Clarke generalized directional derivative J°(t, x; d). Uses the closed
/// form when J carries one, otherwise the largest difference quotient over
/// base points perturbed on the scale of a 1e-7 step.
double clarke_directional(const NonsmoothFunctional& j, double t, ConstVecRef x, ConstVecRef d);

}  // namespace fidhvi
