#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fidhvi/linalg.hpp"

namespace fidhvi {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Strongly monotone operator A(t, ·): R^n → R^n (dual identified with the
/// space through the Euclidean product). `lipschitz` is user-declared.
struct MonotoneOperator {
  int dim = 0;
  std::function<void(double t, ConstVecRef y, VecRef out)> apply;
  double strong_monotonicity = 0.0;  ///< m_A
  double lipschitz = 0.0;            ///< L_A
  /// The matrix when A(t, ·) is a fixed symmetric linear map; empty otherwise.
  Mat matrix;

  /// y ↦ M y for a symmetric positive definite M; constants are its extreme
  /// eigenvalues.
  static MonotoneOperator linear_spd(const Mat& m);
  /// y ↦ a y.
  static MonotoneOperator scaled_identity(int dim, double a);
};

/// Linear map N: R^n2 → R^nY with full row rank. The operator norm is the
/// largest singular value.
class TraceMap {
 public:
  explicit TraceMap(Mat matrix);
  static TraceMap identity(int dim);

  const Mat& matrix() const { return matrix_; }
  double norm() const { return norm_; }
  int rows() const { return static_cast<int>(matrix_.rows()); }
  int cols() const { return static_cast<int>(matrix_.cols()); }

 private:
  Mat matrix_;
  double norm_;
};

/// Scalar locally Lipschitz potential with piecewise-affine derivative.
///
/// Between consecutive breakpoints the derivative is c + k r; at a
/// breakpoint the two one-sided derivatives may differ (a kink) and the
/// Clarke subdifferential is the interval between them. The potential
/// itself is kept continuous.
class ScalarLaw {
 public:
  struct Piece {
    double offset = 0.0;     ///< c
    double curvature = 0.0;  ///< k
  };

  ScalarLaw(std::string name, std::vector<double> breakpoints, std::vector<Piece> pieces,
            double selection_weight = 0.5);

  static ScalarLaw zero();
  /// s |r|
  static ScalarLaw absolute(double scale);
  /// a r² / 2, a may be negative
  static ScalarLaw quadratic(double a);
  /// b r
  static ScalarLaw linear(double b);
  /// Normal compliance: no force for r <= 0, stiffness k up to `onset`,
  /// softening slope -softening over `width`, stiffness k afterwards.
  static ScalarLaw normal_compliance(double stiffness, double onset, double width,
                                     double softening);
  /// Odd, regularized slip-weakening friction: slope mu/reg near 0, level mu
  /// at |r| = reg, decreasing with slope -mu*weakening over `width`, then flat.
  static ScalarLaw friction_weakening(double mu, double reg, double weakening, double width);
  /// Derivative ramps from 0 to `drop` over each period and falls back by
  /// `drop` at every kink; 2*periods + 1 kinks centred at 0.
  static ScalarLaw sawtooth(double drop, double period, int periods);

  const std::string& name() const { return name_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  double value(double r) const;
  double left_derivative(double r) const;
  double right_derivative(double r) const;
  /// Clarke subdifferential [lo, hi].
  std::pair<double, double> subdifferential(double r) const;
  /// Selected subgradient; at kinks left + w (right - left), w the selection weight.
  double selection(double r) const;
  /// j°(r; d) = max over the subdifferential of ξ d.
  double directional(double r, double d) const;
  bool is_kink(double r) const;

  /// The unique r with r + lambda ∂j(r) ∋ s. Needs lambda * relaxed_monotonicity() < 1.
  double resolvent(double lambda, double s) const;

  /// sup |ξ| / (1 + |r|) over all subgradients.
  double growth() const { return growth_; }
  /// Smallest c >= 0 with (ξ1 - ξ2)(r1 - r2) >= -c (r1 - r2)²; +inf if the
  /// derivative ever jumps down.
  double relaxed_monotonicity() const { return relaxed_; }
  /// Lipschitz modulus of the derivative; +inf when it jumps.
  double derivative_lipschitz() const { return lipschitz_; }

  ScalarLaw scaled(double factor) const;
  ScalarLaw plus(const ScalarLaw& other) const;

 private:
  std::size_t left_piece(double r) const;
  std::size_t right_piece(double r) const;

  std::string name_;
  std::vector<double> breakpoints_;
  std::vector<Piece> pieces_;
  std::vector<double> value_offsets_;
  double selection_weight_;
  double growth_ = 0.0;
  double relaxed_ = 0.0;
  double lipschitz_ = 0.0;
};

/// A law acting on one component of x ∈ R^nY.
struct LawTerm {
  int component = 0;
  ScalarLaw law;
};

/// Locally Lipschitz J(t, ·): R^nY → R with a Clarke-subgradient selection.
struct NonsmoothFunctional {
  int dim = 0;
  std::string name;
  std::function<double(double t, ConstVecRef x)> value;
  std::function<void(double t, ConstVecRef x, VecRef out)> subgradient;
  double growth = 0.0;                ///< m_J: ‖ξ‖ <= m_J (‖x‖ + 1)
  double relaxed_monotonicity = 0.0;  ///< c_J
  /// Lipschitz modulus of the selection when finite; the inner solver uses
  /// max(m_J, this) as the modulus of the subgradient map.
  double subgradient_lipschitz = kInfinity;
  std::function<bool(double t, ConstVecRef x)> is_kink;
  /// Closed-form J°(t, x; d); empty for functionals without one.
  std::function<double(double t, ConstVecRef x, ConstVecRef d)> directional;
  /// Populated for separable functionals built from scalar laws.
  std::vector<LawTerm> terms;

  static NonsmoothFunctional zero(int dim);
  /// J(x) = Σ law_i(x[component_i]). Constants: c_J is the largest per-component
  /// sum of relaxed constants; m_J is √nY times the largest per-component
  /// growth sum (exact when nY = 1).
  static NonsmoothFunctional separable(int dim, std::vector<LawTerm> terms,
                                       std::string name = "separable");

  NonsmoothFunctional with_terms(const std::vector<LawTerm>& extra) const;
};

}  // namespace fidhvi
