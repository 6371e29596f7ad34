#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fidhvi/csv.hpp"
#include "fidhvi/hypotheses.hpp"
#include "fidhvi/problem.hpp"
#include "fidhvi/solver.hpp"

namespace fidhvi {

/// δ ↦ J_δ with the modulus V(δ) bounding the change of Nᵀ∂J.
///
/// With `state_scaled` the modulus is relative: ‖Nᵀ(ξ - ξ_δ)(Ny)‖ <=
/// V(δ) ‖N‖ ‖Ny‖, and the absolute modulus used in the bounds becomes
/// ‖N‖² · measure · sup‖y_δ‖ · V(δ) once y_δ is known.
struct PerturbationFamily {
  std::string name;
  std::function<NonsmoothFunctional(double delta)> make;
  std::function<double(double delta)> modulus;
  double m_a0 = 0.0;  ///< floor with m_A > m_A0 > c_{Jδ} ‖N‖²
  bool state_scaled = false;
  double measure = 1.0;  ///< contact-set measure for state-scaled families
};

/// J_δ = J + δ⟨b, ·⟩, V(δ) = δ ‖N‖ ‖b‖.
PerturbationFamily linear_shift_family(const ProblemSpec& spec, const Vec& b);

struct PerturbationRow {
  double delta = 0.0;
  double v_delta = 0.0;
  double sup_z_err = 0.0;
  double sup_y_err = 0.0;
  double gronwall_ceiling = 0.0;
  double y_bound = 0.0;
  int sweeps = 0;
};

struct PerturbationStudy {
  std::vector<PerturbationRow> rows;
  SolveReport base;
  double k2 = 0.0;
  double solver_slack = 0.0;  ///< 10 × (outer tol + inner tol), the allowance on both bounds

  /// Least-squares slope of log sup_z_err against log δ over rows with δ > 0.
  double z_slope() const;
  /// `delta,V_delta,sup_z_err,sup_y_err,gronwall_ceiling,y_bound`
  csv::Table table() const;
};

struct PerturbationOptions {
  SolveOptions solve{};
  SamplingOptions sampling{};
  int threads = 1;
};

/// Sampled closeness and coercivity checks plus the monotone decay of V along
/// `deltas`. ConstantViolation on the first failure.
void validate_family(const ProblemSpec& spec, const PerturbationFamily& family,
                     const std::vector<double>& deltas, const SamplingOptions& sampling);

/// Solves the base problem and every perturbed one, recording the errors
/// against the Gronwall ceiling (k₁ = T^κ M₁ V / (κ Γ(κ) m), k₂ = M₁ (m_g/m + 1) / Γ(κ),
/// m = m_A - c_J‖N‖², envelope at T) and the y-error bound.
PerturbationStudy run_perturbation_study(const ProblemSpec& spec,
                                         const PerturbationFamily& family,
                                         const std::vector<double>& deltas,
                                         const PerturbationOptions& options = {});

/// V / m + m_g / m · sup_z_err with m = m_A - c_J‖N‖²; ConstantViolation if m <= 0.
double y_error_bound(double v_delta, double sup_z_err, double m_a, double c_j, double n_norm,
                     double m_g);

/// Least-squares slope through (log x, log y).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs `work(i)` for i in [0, count) on up to `threads` threads. Results
/// must be written to per-index slots by the callee; the first exception
/// (lowest index) is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& work);

}  // namespace fidhvi
