#include "fidhvi/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fidhvi/errors.hpp"

namespace fidhvi::special {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Series sum A_g(x) for the shifted argument x = z - 1.
double lanczos_sum(double x) {
  double a = kLanczosCoeffs[0];
  for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) {
    a += kLanczosCoeffs[i] / (x + static_cast<double>(i));
  }
  return a;
}

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_fn: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x < 0.5) {
    // Γ(x) Γ(1-x) = π / sin(πx)
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  // Split the power so large arguments do not overflow before exp(-t) applies.
  const double half_pow = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_pow * (half_pow * std::exp(-t)) *
         lanczos_sum(z);
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  if (x < 0.5) {
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(lanczos_sum(z));
}

MLEval mittag_leffler(double order, double x) {
  if (!(order > 0.0 && order <= 2.0)) {
    throw DomainError("mittag_leffler: order must lie in (0, 2], got " +
                      std::to_string(order));
  }
  if (!(std::abs(x) <= 50.0)) {
    throw DomainError("mittag_leffler: |x| must not exceed 50, got " +
                      std::to_string(x));
  }

  MLEval out;
  out.order = order;
  out.argument = x;
  if (x == 0.0) {
    out.value = 1.0;
    out.terms_used = 1;
    out.truncation_bound = 0.0;
    return out;
  }

  constexpr int kMaxTerms = 200000;
  constexpr double kTermEps = 1e-16;
  constexpr double kEvalRelErr = 4e-15;  // per-term relative error budget

  const double log_abs_x = std::log(std::abs(x));
  CompensatedSum sum;
  double abs_sum = 0.0;
  int small_run = 0;
  int j = 0;
  double last_abs_term = 0.0;
  for (; j < kMaxTerms; ++j) {
    double term;
    if (j == 0) {
      term = 1.0;
    } else {
      const double arg = order * j + 1.0;
      const double log_mag = j * log_abs_x - log_gamma(arg);
      if (log_mag > 700.0) {
        throw DomainError("mittag_leffler: series terms overflow for order " +
                          std::to_string(order) + ", x " + std::to_string(x));
      }
      if (arg < 170.0 && j * std::abs(log_abs_x) < 600.0) {
        term = std::pow(x, j) / gamma_fn(arg);
      } else {
        term = std::exp(log_mag);
        if (x < 0.0 && (j % 2 == 1)) term = -term;
      }
    }
    sum.add(term);
    abs_sum += std::abs(term);
    last_abs_term = std::abs(term);

    if (j > 0 && last_abs_term < kTermEps * std::max(1.0, std::abs(sum.value()))) {
      // Ratio of the next term to this one; it decreases in j, so once it is
      // below one the tail is dominated by a geometric series.
      const double ratio = std::exp(log_abs_x + log_gamma(order * j + 1.0) -
                                    log_gamma(order * (j + 1) + 1.0));
      if (ratio < 1.0) {
        ++small_run;
        if (small_run >= 3) {
          out.truncation_bound = last_abs_term * ratio / (1.0 - ratio);
          ++j;
          break;
        }
      } else {
        small_run = 0;
      }
    } else {
      small_run = 0;
    }
  }
  if (j >= kMaxTerms) {
    throw DomainError("mittag_leffler: series did not settle within the term budget");
  }

  out.value = sum.value();
  out.terms_used = j;
  out.truncation_bound += kEvalRelErr * abs_sum;
  if (!std::isfinite(out.value)) {
    throw DomainError("mittag_leffler: value is not finite in double precision");
  }
  return out;
}

double KernelWeights::apply(std::span<const double> samples) const {
  if (samples.size() != weights.size()) {
    throw DomainError("KernelWeights::apply: expected " +
                      std::to_string(weights.size()) + " samples, got " +
                      std::to_string(samples.size()));
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < weights.size(); ++i) acc.add(weights[i] * samples[i]);
  return acc.value();
}

IntervalMoments interval_moments(double order, double distance, double width) {
  // With r = width / distance and x = (distance - u) / distance:
  //   S0(r) = ∫_0^r (1-x)^{order-1} dx,  S1(r) = ∫_0^r (1-x)^{order-1} x dx.
  const double r = std::min(1.0, width / distance);
  const double s0 = -std::expm1(order * std::log1p(-r)) / order;
  double s1;
  if (r <= 0.5) {
    // Binomial series: every term is nonnegative, so no cancellation.
    double coeff = 1.0;
    double rpow = r * r;
    double acc = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double term = coeff * rpow / (k + 2);
      acc += term;
      if (term <= 1e-17 * acc) break;
      coeff *= (k + 1 - order) / (k + 1);
      rpow *= r;
    }
    s1 = acc;
  } else {
    s1 = s0 + std::expm1((order + 1.0) * std::log1p(-r)) / (order + 1.0);
  }
  const double scale = std::pow(distance, order);
  IntervalMoments m;
  m.right = scale * s1 / r;
  m.left = scale * (s0 - s1 / r);
  return m;
}

KernelWeights riemann_liouville_weights(double order,
                                        std::span<const double> nodes, double t) {
  if (!(order > 0.0 && order <= 1.0)) {
    throw DomainError("riemann_liouville_weights: order must lie in (0, 1]");
  }
  if (nodes.size() < 2) {
    throw DomainError("riemann_liouville_weights: need at least two nodes");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw DomainError("riemann_liouville_weights: nodes must be strictly increasing");
    }
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(nodes.back()));
  std::size_t target = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (std::abs(nodes[i] - t) <= tol) {
      target = i;
      break;
    }
  }
  if (target == nodes.size()) {
    throw DomainError("riemann_liouville_weights: target is not a node");
  }
  if (target == 0) {
    throw DomainError("riemann_liouville_weights: target must exceed the first node");
  }

  KernelWeights kw;
  kw.order = order;
  kw.nodes.assign(nodes.begin(), nodes.begin() + static_cast<long>(target) + 1);
  kw.target = nodes[target];
  kw.weights.assign(target + 1, 0.0);
  for (std::size_t k = 0; k < target; ++k) {
    const auto m = interval_moments(order, kw.target - nodes[k], nodes[k + 1] - nodes[k]);
    kw.weights[k] += m.left;
    kw.weights[k + 1] += m.right;
  }
  return kw;
}

std::vector<double> caputo_l1_general(std::span<const double> nodes,
                                      std::span<const double> samples,
                                      double order) {
  if (nodes.size() != samples.size()) {
    throw DomainError("caputo_l1: nodes and samples differ in length");
  }
  if (samples.size() < 3) {
    throw DomainError("caputo_l1: need at least three samples");
  }
  if (!(order > 0.0 && order <= 1.0)) {
    throw DomainError("caputo_l1: order must lie in (0, 1]");
  }
  const std::size_t n = samples.size();
  std::vector<double> out(n, 0.0);
  if (order == 1.0) {
    for (std::size_t i = 1; i < n; ++i) {
      out[i] = (samples[i] - samples[i - 1]) / (nodes[i] - nodes[i - 1]);
    }
    return out;
  }
  const double expo = 1.0 - order;
  const double inv_gamma = 1.0 / gamma_fn(2.0 - order);
  for (std::size_t i = 1; i < n; ++i) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < i; ++k) {
      const double slope = (samples[k + 1] - samples[k]) / (nodes[k + 1] - nodes[k]);
      const double span =
          std::pow(nodes[i] - nodes[k], expo) - std::pow(nodes[i] - nodes[k + 1], expo);
      acc.add(slope * span);
    }
    out[i] = acc.value() * inv_gamma;
  }
  return out;
}

std::vector<double> caputo_l1(std::span<const double> nodes,
                              std::span<const double> samples, double order) {
  if (!(order > 0.0 && order < 1.0)) {
    throw DomainError("caputo_l1: order must lie in (0, 1)");
  }
  if (samples.size() < 3 || nodes.size() != samples.size()) {
    throw DomainError("caputo_l1: need at least three samples, one per node");
  }
  const double step = nodes[1] - nodes[0];
  if (!(step > 0.0)) throw DomainError("caputo_l1: nodes must be increasing");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (std::abs((nodes[i] - nodes[i - 1]) - step) > 1e-9 * step) {
      throw DomainError("caputo_l1: nodes are not uniformly spaced");
    }
  }
  return caputo_l1_general(nodes, samples, order);
}

}  // namespace fidhvi::special
