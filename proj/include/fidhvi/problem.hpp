#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fidhvi/functional.hpp"
#include "fidhvi/linalg.hpp"
#include "fidhvi/trajectory.hpp"

namespace fidhvi {

/// Right-hand side f(t, z, y) of the fractional equation.
struct DynamicsMap {
  std::function<void(double t, ConstVecRef z, ConstVecRef y, VecRef out)> eval;
  double lipschitz = 0.0;  ///< M₁, jointly in (z, y)
  /// φ(t) with ‖f(t, z, y)‖ <= φ(t); only sampled, never used by the solver.
  std::function<double(double t)> bound;
};

/// Impulse Θ_j with Lipschitz constant d_j.
struct ImpulseMap {
  std::function<void(ConstVecRef z, VecRef out)> eval;
  double lipschitz = 0.0;
};

/// Coupling g(t, z) feeding the inclusion.
struct CouplingMap {
  std::function<void(double t, ConstVecRef z, VecRef out)> eval;
  double lipschitz = 0.0;  ///< m_g
};

/// Finite-dimensional data of the coupled problem
///   ᶜD^κ z = f(t, z, y),  Λz(τ_j) = Θ_j(z(τ_j⁻)),  z(0) = z0,
///   A(t, y) + Nᵀ∂J(t, Ny) ∋ g(t, z).
struct ProblemSpec {
  std::string name;
  double order = 0.5;
  TimeGrid grid;
  Vec z0;
  DynamicsMap f;
  std::vector<ImpulseMap> impulses;  ///< one per impulse time of the grid
  MonotoneOperator a;
  TraceMap n;
  NonsmoothFunctional j;
  CouplingMap g;

  int dim_z() const { return static_cast<int>(z0.size()); }
  int dim_y() const { return a.dim; }

  /// Structural checks (dimensions, order range, one impulse map per
  /// impulse time). DomainError on failure.
  void validate() const;

  ProblemSpec with_grid(TimeGrid grid) const;
};

}  // namespace fidhvi
