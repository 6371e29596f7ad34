#pragma once

#include <span>
#include <vector>

namespace fidhvi::special {

/// Gamma function for x > 0 (Lanczos approximation, g = 7, nine terms).
/// Arguments below 0.5 go through the reflection formula.
double gamma_fn(double x);

/// log Γ(x) for x > 0, same approximation in logarithmic form.
double log_gamma(double x);

/// Result of a Mittag-Leffler evaluation.
///
/// `truncation_bound` bounds |value - E_order(argument)|: it is the
/// geometric tail bound of the unsummed terms plus the accumulated
/// term-evaluation rounding.
struct MLEval {
  double order = 1.0;
  double argument = 0.0;
  double value = 1.0;
  int terms_used = 1;
  double truncation_bound = 0.0;
};

/// One-parameter Mittag-Leffler function E_order(x) = sum_j x^j / Γ(order j + 1),
/// summed directly with compensated addition.
///
/// Domain: order in (0, 2], |x| <= 50. Throws DomainError outside it or
/// when the series overflows double precision.
MLEval mittag_leffler(double order, double x);

/// Product-trapezoidal weights for the weakly singular integral
/// ∫_{nodes[0]}^{target} (target - s)^{order-1} z(s) ds, one weight per node
/// not exceeding `target`. The 1/Γ(order) factor is applied by the caller.
struct KernelWeights {
  double order = 1.0;
  std::vector<double> nodes;
  double target = 0.0;
  std::vector<double> weights;

  /// Weighted sum of `samples` (one per weight).
  double apply(std::span<const double> samples) const;
};

KernelWeights riemann_liouville_weights(double order,
                                        std::span<const double> nodes,
                                        double t);

/// Exact moments of the kernel u^{order-1} against the two hat functions of
/// one interval. `distance` is target - left end of the interval, `width`
/// the interval length (0 < width <= distance).
struct IntervalMoments {
  double left = 0.0;   ///< multiplies the sample at the interval's left end
  double right = 0.0;  ///< multiplies the sample at the interval's right end
};

IntervalMoments interval_moments(double order, double distance, double width);

/// L1 approximation of the Caputo derivative (0 < order < 1) on uniformly
/// spaced samples. Entry 0 is 0 by convention.
std::vector<double> caputo_l1(std::span<const double> nodes,
                              std::span<const double> samples, double order);

/// Same scheme on an arbitrary increasing node set; no uniformity check.
/// order == 1 degenerates to the backward difference.
std::vector<double> caputo_l1_general(std::span<const double> nodes,
                                      std::span<const double> samples,
                                      double order);

}  // namespace fidhvi::special
