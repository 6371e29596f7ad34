#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "fidhvi/csv.hpp"
#include "fidhvi/errors.hpp"
#include "fidhvi/inclusion.hpp"
#include "fidhvi/problem.hpp"
#include "fidhvi/trajectory.hpp"

namespace fidhvi {

/// ρ = T^κ M₁ m_g / (κ (m_A - c_J‖N‖²) Γ(κ)). ConstantViolation when the
/// denominator is not positive.
double contraction_factor(const ProblemSpec& spec);

/// Sup-norm Lipschitz bound of the Σ map itself:
/// Σ_j d_j + T^κ M₁ (1 + m_g / (m_A - c_J‖N‖²)) / (κ Γ(κ)).
/// Unlike ρ it accounts for f depending on z directly and for the impulses.
double sigma_lipschitz_bound(const ProblemSpec& spec);

/// Product-trapezoidal weights of the fractional integral at every node of
/// a grid, kept per interval so impulse nodes can use right limits on the
/// interval that starts there. Immutable; share freely.
class MemoryKernel {
 public:
  MemoryKernel(double order, const TimeGrid& grid);

  double order() const { return order_; }
  std::size_t size() const { return size_; }
  /// Weight of the sample at the left end of interval k for target node i (k < i).
  double left(std::size_t i, std::size_t k) const { return left_[offset(i) + k]; }
  double right(std::size_t i, std::size_t k) const { return right_[offset(i) + k]; }

  /// (1/Γ(κ)) ∫_0^{t_i} (t_i - s)^{κ-1} u(s) ds for the piecewise-linear
  /// interpolant of u, using u's right limits at impulse nodes.
  Vec integrate(const PiecewiseTrajectory& u, std::size_t i) const;

 private:
  static std::size_t offset(std::size_t i) { return i * (i - 1) / 2; }

  double order_;
  std::size_t size_;
  std::vector<double> left_;
  std::vector<double> right_;
};

/// z0 + Σ_{τ_i < t} Θ_i(z(τ_i⁻)) + (1/Γ(κ)) ∫_0^t (t - s)^{κ-1} u(s) ds at node t.
Vec memory_integral(const ProblemSpec& spec, const PiecewiseTrajectory& u,
                    const PiecewiseTrajectory& z, double t);

struct SolveOptions {
  double tol = 1e-10;
  int max_sweeps = 200;
  InclusionOptions inner{};
  /// Initial z iterate; the constant z0 trajectory when empty.
  std::optional<PiecewiseTrajectory> initial;
  /// Share a kernel across solves on the same grid and order.
  std::shared_ptr<const MemoryKernel> kernel;
};

struct SolveReport {
  PiecewiseTrajectory z;
  PiecewiseTrajectory y;
  int picard_iterations = 0;
  std::vector<double> sweep_deltas;         ///< sup ‖z_{k+1} - z_k‖
  std::vector<double> sweep_inner_residuals;  ///< max inner residual per sweep
  double contraction_factor = 0.0;
  double max_inclusion_residual = 0.0;
  double integral_equation_residual = 0.0;
  bool order_is_one = false;  ///< κ = 1: classical derivative, flagged in reports

  /// Measured ratios sweep_deltas[k] / sweep_deltas[k-1], k >= 1.
  std::vector<double> ratios() const;
  /// `sweep,sup_delta,max_inner_residual`
  csv::Table convergence_table() const;
};

class SolveNonConvergence : public NonConvergence {
 public:
  SolveNonConvergence(const std::string& what, SolveReport best)
      : NonConvergence(what, best.sweep_deltas.empty() ? 0.0 : best.sweep_deltas.back(),
                       best.picard_iterations),
        best_(std::move(best)) {}
  const SolveReport& best() const noexcept { return best_; }

 private:
  SolveReport best_;
};

/// Inner solves y = y_z at every node (and at right limits of impulse nodes).
/// Warm start: `warm` when given, otherwise the previous node's solution.
/// Returns the largest inner residual through `max_residual`.
PiecewiseTrajectory solve_inner(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                                const InclusionOptions& options,
                                const PiecewiseTrajectory* warm = nullptr,
                                double* max_residual = nullptr);

/// f(t, z, y) sampled on the grid, right limits included.
PiecewiseTrajectory dynamics_samples(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                                     const PiecewiseTrajectory& y);

/// The fixed-point map Σz = z0 + Σ Θ_i(z(τ_i⁻)) + I^κ f(·, z, y_z).
PiecewiseTrajectory sigma_map(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                              const InclusionOptions& options = {},
                              const MemoryKernel* kernel = nullptr);

/// Picard iteration on Σ. Inside a sweep every impulse is applied to the
/// freshly computed left limit, so the converged iterate satisfies the jump
/// condition to rounding. Stops when the sup-distance between consecutive
/// iterates is <= tol; gives up (SolveNonConvergence) after max_sweeps or
/// after three consecutive sweeps with ratio above one.
SolveReport picard_solve(const ProblemSpec& spec, const SolveOptions& options = {});

struct ResidualReport {
  double r_z = 0.0;      ///< sup defect of the integral equation
  double r_y = 0.0;      ///< max distance to the inclusion
  double caputo = 0.0;   ///< sup |L1 Caputo derivative of the continuous part - f|
  std::size_t caputo_nodes = 0;
};

/// Nodes within this fraction of T after 0 and after each impulse are left
/// out of the Caputo cross-check, where the L1 scheme is inaccurate.
inline constexpr double kCaputoGuardFraction = 0.05;

ResidualReport residual_check(const ProblemSpec& spec, const SolveReport& report,
                              const MemoryKernel* kernel = nullptr);

/// k₁ [1 + D* E_κ(k₂ Γ(κ) t^κ)]^j E_κ(k₂ Γ(κ) t^κ) at every node, j the
/// subinterval index, D* = max d_j. Right limits at τ_j use the next power.
PiecewiseTrajectory gronwall_envelope(double k1, double k2, const std::vector<double>& d,
                                      double order, const TimeGrid& grid);

}  // namespace fidhvi
