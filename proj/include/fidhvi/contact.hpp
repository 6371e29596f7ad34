#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fidhvi/csv.hpp"
#include "fidhvi/functional.hpp"
#include "fidhvi/perturbation.hpp"
#include "fidhvi/problem.hpp"

namespace fidhvi {

/// Clamped 1-D elastic rod on [0, length] with linear elements. The left
/// end is clamped; the traction f₂ acts at the free right end and the
/// contact laws act on the displacement of `contact_node`.
///
/// Traction dynamics: ᶜD^κ f₂ = -traction_decay f₂ + displacement_coupling u_c
/// + traction_source, with jumps Θ_j(f₂) = jump_scale f₂ + jump_shift.
struct ContactModel {
  double length = 1.0;
  double ea = 1.0;  ///< Young modulus times cross-section
  int elements = 2;
  int contact_node = -1;  ///< 1..elements; -1 selects the free end

  double order = 0.5;
  double horizon = 1.0;
  std::vector<double> impulse_times;

  double body_force = 0.5;  ///< f₀, constant per unit length
  double initial_traction = 0.2;
  double traction_decay = 0.1;
  double displacement_coupling = 0.05;
  double traction_source = 0.0;
  double jump_scale = 0.0;
  double jump_shift = 0.2;

  // j_ν: normal compliance with a softening band.
  double normal_stiffness = 1.0;
  double normal_onset = 0.05;
  double normal_width = 0.1;
  double normal_softening = 0.2;
  // j_τ: regularized slip-weakening friction.
  double friction = 0.2;
  double friction_reg = 0.05;
  double friction_weakening = 1.0;
  double friction_width = 0.2;

  /// Declared m_𝔸; λ_min(K) when unset. Must not exceed λ_min(K).
  std::optional<double> declared_m_a;

  double step() const { return length / elements; }
  int contact_index() const;  ///< 0-based unknown index of the contact node
};

/// Stiffness of the free nodes 1..elements (node 0 is clamped).
Mat assemble_stiffness(const ContactModel& model);

/// Σ_e EA (Δu_e / h)(Δv_e / h) h with u_0 = v_0 = 0.
double element_energy_product(const ContactModel& model, const Vec& u, const Vec& v);

/// Consistent body load plus the traction at the free end.
Vec assemble_load(const ContactModel& model, double t, const Vec& traction);

/// γ: selects the contact-node displacement; ‖γ‖ = 1.
TraceMap discrete_trace(const ContactModel& model);

ScalarLaw normal_law(const ContactModel& model);
ScalarLaw friction_law(const ContactModel& model);
/// J(x) = j_ν(x) + j_τ(x) on the single contact component.
NonsmoothFunctional contact_functional(const ContactModel& model);

struct ContactConstants {
  double lambda_min = 0.0;
  double m_a = 0.0;
  double alpha_normal = 0.0;    ///< relaxed constant of j_ν
  double alpha_friction = 0.0;  ///< relaxed constant of j_τ
  double c0 = 1.0;
  double m1 = 0.0;
  double m_g = 1.0;
};

ContactConstants contact_constants(const ContactModel& model);

/// The contact problem as a ProblemSpec: z = f₂, y = u. ConstantViolation
/// (with both sides) when m_𝔸 <= (α_ν + α_τ) c₀².
ProblemSpec to_problem_spec(const ContactModel& model, const TimeGrid& grid);
TimeGrid contact_grid(const ContactModel& model, int steps_per_subinterval);

enum class ContactFamilyKind {
  normal_quadratic,   ///< j_ν + δ r² / 2, V̄(δ) = δ
  friction_to_zero,   ///< j_τ with coefficient δ on a frictionless base, V̄(δ) = δ / reg
  normal_absolute,    ///< j_ν + δ |r|; breaks H(j*), shipped as a negative case
};

/// State-scaled family on the contact functional; V(δ) = c₀² meas sup‖u_δ‖ V̄(δ).
PerturbationFamily contact_family(const ContactModel& model, ContactFamilyKind kind);

/// Base model of a family (frictionless for friction_to_zero).
ContactModel family_base(const ContactModel& model, ContactFamilyKind kind);

PerturbationStudy run_contact_perturbation(const ContactModel& model, ContactFamilyKind kind,
                                           const std::vector<double>& deltas,
                                           int steps_per_subinterval,
                                           const PerturbationOptions& options = {});

/// `t,u_1..u_n` (node values).
csv::Table displacement_table(const PiecewiseTrajectory& u);

}  // namespace fidhvi
