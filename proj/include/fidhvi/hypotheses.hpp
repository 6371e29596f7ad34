#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fidhvi/csv.hpp"
#include "fidhvi/functional.hpp"
#include "fidhvi/problem.hpp"
#include "fidhvi/trajectory.hpp"

namespace fidhvi {

/// Sampled evidence about one declared constant. Sampling can refute a
/// constant but never certify it.
struct ConstantEstimate {
  enum class Kind { lower, upper };  ///< declared is a lower (m_A) or upper bound

  std::string name;
  Kind kind = Kind::upper;
  double declared = 0.0;
  double observed = 0.0;  ///< extremum over the sampled quotients
  int samples = 0;
  bool refuted = false;

  const char* verdict() const { return refuted ? "refuted" : "consistent"; }
};

/// Violation margin: 1e-9 relative to max(|declared|, 1).
bool violates(ConstantEstimate::Kind kind, double declared, double observed);

struct SamplingOptions {
  int samples = 2000;
  double radius = 2.0;
  std::uint64_t seed = 20240611;
  /// Nodes of a computed solution; when set, half of the base points are
  /// drawn in a ball around a random node value instead of the origin.
  /// Independently, every second pair is a close pair.
  const PiecewiseTrajectory* around_z = nullptr;
  const PiecewiseTrajectory* around_y = nullptr;
};

/// Deterministic point source. Pairs come from one mt19937_64 stream in a
/// fixed order, so a run with 2n samples sees the first n pairs of a run
/// with n samples.
class PairSampler {
 public:
  PairSampler(std::uint64_t seed, double radius) : rng_(seed), radius_(radius) {}

  Vec in_ball(int dim, const Vec* center = nullptr);
  /// Second point of a pair: independent in the ball, or with `local` at a
  /// log-uniform distance in [1e-6, 1] * radius from `x` (finds kinks).
  Vec partner(const Vec& x, const Vec* center, bool local);
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);

 private:
  Vec direction(int dim);

  std::mt19937_64 rng_;
  double radius_;
};

ConstantEstimate estimate_strong_monotonicity(const MonotoneOperator& a, double horizon,
                                              const SamplingOptions& opt = {});
ConstantEstimate estimate_operator_lipschitz(const MonotoneOperator& a, double horizon,
                                             const SamplingOptions& opt = {});
/// max -⟨θ1 - θ2, x1 - x2⟩ / ‖x1 - x2‖² with θ the subgradient selection.
/// `declared` overrides J's own c_J when given.
ConstantEstimate estimate_relaxed_monotonicity(const NonsmoothFunctional& j, double horizon,
                                               const SamplingOptions& opt = {},
                                               std::optional<double> declared = std::nullopt);
/// max ‖θ(x)‖ / (‖x‖ + 1).
ConstantEstimate estimate_growth(const NonsmoothFunctional& j, double horizon,
                                 const SamplingOptions& opt = {});
/// max ‖f(t,z1,y1) - f(t,z2,y2)‖ / (‖z1 - z2‖ + ‖y1 - y2‖).
ConstantEstimate estimate_dynamics_lipschitz(const ProblemSpec& spec,
                                             const SamplingOptions& opt = {});
/// max ‖f(t,z,y)‖ / φ(t); declared 1.
ConstantEstimate estimate_dynamics_bound(const ProblemSpec& spec, const SamplingOptions& opt = {});
ConstantEstimate estimate_coupling_lipschitz(const ProblemSpec& spec,
                                             const SamplingOptions& opt = {});
ConstantEstimate estimate_impulse_lipschitz(const ProblemSpec& spec, int j,
                                            const SamplingOptions& opt = {});

/// Largest singular value by power iteration on NᵀN.
double operator_norm_power(const Mat& n, int max_iter = 10000, double tol = 1e-15);
ConstantEstimate estimate_trace_norm(const TraceMap& n, std::uint64_t seed);

struct HOReport {
  bool strong_monotonicity_ok = false;  ///< m_A > c_J ‖N‖²
  bool contraction_ok = false;          ///< ρ < 1
  double m_a = 0.0;
  double budget = 0.0;  ///< c_J ‖N‖²
  double rho = 0.0;     ///< NaN when the first condition fails
};

HOReport check_HO(const ProblemSpec& spec);

/// All estimators on one problem.
std::vector<ConstantEstimate> hypotheses_report(const ProblemSpec& spec,
                                                const SamplingOptions& opt = {});

/// `constant,declared,observed,samples,verdict`
csv::Table estimates_table(const std::vector<ConstantEstimate>& estimates);

}  // namespace fidhvi
