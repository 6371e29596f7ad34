#include "fidhvi/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fidhvi/errors.hpp"
#include "fidhvi/inclusion.hpp"
#include "fidhvi/solver.hpp"

namespace fidhvi {

bool violates(ConstantEstimate::Kind kind, double declared, double observed) {
  if (std::isinf(declared)) return false;
  const double margin = 1e-9 * std::max(std::abs(declared), 1.0);
  return kind == ConstantEstimate::Kind::lower ? observed < declared - margin
                                               : observed > declared + margin;
}

Vec PairSampler::direction(int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  do {
    for (int k = 0; k < dim; ++k) v[k] = normal(rng_);
  } while (!(v.norm() > 0.0));
  return v / v.norm();
}

Vec PairSampler::in_ball(int dim, const Vec* center) {
  const double r = radius_ * std::pow(uniform(0.0, 1.0), 1.0 / dim);
  Vec p = r * direction(dim);
  if (center) p += *center;
  return p;
}

Vec PairSampler::partner(const Vec& x, const Vec* center, bool local) {
  if (!local) return in_ball(static_cast<int>(x.size()), center);
  const double s = radius_ * std::pow(10.0, -6.0 * uniform(0.0, 1.0));
  return x + s * direction(static_cast<int>(x.size()));
}

double PairSampler::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng_);
}

std::size_t PairSampler::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> u(0, n - 1);
  return u(rng_);
}

namespace {

void check_samples(const SamplingOptions& opt) {
  if (opt.samples < 2) throw DomainError("estimators need at least two samples");
  if (!(opt.radius > 0.0)) throw DomainError("estimators need a positive sampling radius");
}

ConstantEstimate finish(std::string name, ConstantEstimate::Kind kind, double declared,
                        double observed, int samples) {
  ConstantEstimate e;
  e.name = std::move(name);
  e.kind = kind;
  e.declared = declared;
  e.observed = observed;
  e.samples = samples;
  e.refuted = violates(kind, declared, observed);
  return e;
}

// Center for sample k: the origin, or for k = 2, 3 mod 4 a random node value
// of the reference trajectory.
const Vec* pick_center(PairSampler& s, const PiecewiseTrajectory* traj, int dim, int k) {
  if (!traj || traj->dim() != dim || (k / 2) % 2 == 0) return nullptr;
  return &traj->left(s.index(traj->grid().size()));
}

}  // namespace

ConstantEstimate estimate_strong_monotonicity(const MonotoneOperator& a, double horizon,
                                              const SamplingOptions& opt) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  Vec a1(a.dim), a2(a.dim);
  double lo = kInfinity;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, horizon);
    const Vec* c = pick_center(s, opt.around_y, a.dim, k);
    const Vec y1 = s.in_ball(a.dim, c);
    Vec y2 = s.partner(y1, c, k % 2 == 1);
    while (!((y1 - y2).norm() > 0.0)) y2 = s.in_ball(a.dim, c);
    a.apply(t, y1, a1);
    a.apply(t, y2, a2);
    const Vec d = y1 - y2;
    lo = std::min(lo, (a1 - a2).dot(d) / d.squaredNorm());
  }
  return finish("m_A", ConstantEstimate::Kind::lower, a.strong_monotonicity, lo, opt.samples);
}

ConstantEstimate estimate_operator_lipschitz(const MonotoneOperator& a, double horizon,
                                             const SamplingOptions& opt) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  Vec a1(a.dim), a2(a.dim);
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, horizon);
    const Vec* c = pick_center(s, opt.around_y, a.dim, k);
    const Vec y1 = s.in_ball(a.dim, c);
    Vec y2 = s.partner(y1, c, k % 2 == 1);
    while (!((y1 - y2).norm() > 0.0)) y2 = s.in_ball(a.dim, c);
    a.apply(t, y1, a1);
    a.apply(t, y2, a2);
    hi = std::max(hi, (a1 - a2).norm() / (y1 - y2).norm());
  }
  return finish("L_A", ConstantEstimate::Kind::upper, a.lipschitz, hi, opt.samples);
}

ConstantEstimate estimate_relaxed_monotonicity(const NonsmoothFunctional& j, double horizon,
                                               const SamplingOptions& opt,
                                               std::optional<double> declared) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  Vec th1(j.dim), th2(j.dim);
  double hi = -kInfinity;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, horizon);
    const Vec* c = pick_center(s, opt.around_y, j.dim, k);
    const Vec x1 = s.in_ball(j.dim, c);
    Vec x2 = s.partner(x1, c, k % 2 == 1);
    while (!((x1 - x2).norm() > 0.0)) x2 = s.in_ball(j.dim, c);
    j.subgradient(t, x1, th1);
    j.subgradient(t, x2, th2);
    const Vec d = x1 - x2;
    hi = std::max(hi, -(th1 - th2).dot(d) / d.squaredNorm());
  }
  return finish("c_J", ConstantEstimate::Kind::upper, declared.value_or(j.relaxed_monotonicity),
                hi, opt.samples);
}

ConstantEstimate estimate_growth(const NonsmoothFunctional& j, double horizon,
                                 const SamplingOptions& opt) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  Vec th(j.dim);
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, horizon);
    const Vec* c = pick_center(s, opt.around_y, j.dim, k);
    const Vec x = s.in_ball(j.dim, c);
    j.subgradient(t, x, th);
    hi = std::max(hi, th.norm() / (x.norm() + 1.0));
  }
  return finish("m_J", ConstantEstimate::Kind::upper, j.growth, hi, opt.samples);
}

ConstantEstimate estimate_dynamics_lipschitz(const ProblemSpec& spec, const SamplingOptions& opt) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  const int nz = spec.dim_z();
  const int ny = spec.dim_y();
  Vec f1(nz), f2(nz);
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, spec.grid.horizon());
    const Vec* cz = pick_center(s, opt.around_z, nz, k);
    const Vec* cy = pick_center(s, opt.around_y, ny, k);
    const Vec z1 = s.in_ball(nz, cz);
    const Vec y1 = s.in_ball(ny, cy);
    const Vec z2 = s.partner(z1, cz, k % 2 == 1);
    const Vec y2 = s.partner(y1, cy, k % 2 == 1);
    const double den = (z1 - z2).norm() + (y1 - y2).norm();
    if (!(den > 0.0)) continue;
    spec.f.eval(t, z1, y1, f1);
    spec.f.eval(t, z2, y2, f2);
    hi = std::max(hi, (f1 - f2).norm() / den);
  }
  return finish("M_1", ConstantEstimate::Kind::upper, spec.f.lipschitz, hi, opt.samples);
}

ConstantEstimate estimate_dynamics_bound(const ProblemSpec& spec, const SamplingOptions& opt) {
  check_samples(opt);
  if (!spec.f.bound) throw DomainError("estimate_dynamics_bound: the problem declares no φ");
  PairSampler s(opt.seed, opt.radius);
  const int nz = spec.dim_z();
  const int ny = spec.dim_y();
  Vec f(nz);
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, spec.grid.horizon());
    const Vec z = s.in_ball(nz, pick_center(s, opt.around_z, nz, k));
    const Vec y = s.in_ball(ny, pick_center(s, opt.around_y, ny, k));
    spec.f.eval(t, z, y, f);
    const double phi = spec.f.bound(t);
    hi = std::max(hi, phi > 0.0 ? f.norm() / phi : (f.norm() > 0.0 ? kInfinity : 0.0));
  }
  return finish("phi", ConstantEstimate::Kind::upper, 1.0, hi, opt.samples);
}

ConstantEstimate estimate_coupling_lipschitz(const ProblemSpec& spec, const SamplingOptions& opt) {
  check_samples(opt);
  PairSampler s(opt.seed, opt.radius);
  const int nz = spec.dim_z();
  Vec g1(spec.dim_y()), g2(spec.dim_y());
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const double t = s.uniform(0.0, spec.grid.horizon());
    const Vec* c = pick_center(s, opt.around_z, nz, k);
    const Vec z1 = s.in_ball(nz, c);
    const Vec z2 = s.partner(z1, c, k % 2 == 1);
    const double den = (z1 - z2).norm();
    if (!(den > 0.0)) continue;
    spec.g.eval(t, z1, g1);
    spec.g.eval(t, z2, g2);
    hi = std::max(hi, (g1 - g2).norm() / den);
  }
  return finish("m_g", ConstantEstimate::Kind::upper, spec.g.lipschitz, hi, opt.samples);
}

ConstantEstimate estimate_impulse_lipschitz(const ProblemSpec& spec, int j,
                                            const SamplingOptions& opt) {
  check_samples(opt);
  if (j < 1 || j > static_cast<int>(spec.impulses.size())) {
    throw DomainError("estimate_impulse_lipschitz: impulse index out of range");
  }
  const auto& imp = spec.impulses[static_cast<std::size_t>(j - 1)];
  PairSampler s(opt.seed + static_cast<std::uint64_t>(j), opt.radius);
  const int nz = spec.dim_z();
  Vec t1(nz), t2(nz);
  double hi = 0.0;
  for (int k = 0; k < opt.samples; ++k) {
    const Vec* c = pick_center(s, opt.around_z, nz, k);
    const Vec z1 = s.in_ball(nz, c);
    const Vec z2 = s.partner(z1, c, k % 2 == 1);
    const double den = (z1 - z2).norm();
    if (!(den > 0.0)) continue;
    imp.eval(z1, t1);
    imp.eval(z2, t2);
    hi = std::max(hi, (t1 - t2).norm() / den);
  }
  return finish("d_" + std::to_string(j), ConstantEstimate::Kind::upper, imp.lipschitz, hi,
                opt.samples);
}

double operator_norm_power(const Mat& n, int max_iter, double tol) {
  if (n.size() == 0) return 0.0;
  const Mat ntn = n.transpose() * n;
  Vec v = Vec::Ones(ntn.rows()) / std::sqrt(static_cast<double>(ntn.rows()));
  double lambda = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Vec w = ntn * v;
    const double nw = w.norm();
    if (!(nw > 0.0)) return 0.0;
    const double next = v.dot(w);
    v = w / nw;
    if (std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

ConstantEstimate estimate_trace_norm(const TraceMap& n, std::uint64_t seed) {
  // Power iteration from a fixed start plus random probes ‖Nx‖/‖x‖.
  double hi = operator_norm_power(n.matrix());
  PairSampler s(seed, 1.0);
  constexpr int kProbes = 200;
  for (int k = 0; k < kProbes; ++k) {
    const Vec x = s.in_ball(n.cols());
    if (x.norm() > 0.0) hi = std::max(hi, (n.matrix() * x).norm() / x.norm());
  }
  return finish("norm_N", ConstantEstimate::Kind::upper, n.norm(), hi, kProbes + 1);
}

HOReport check_HO(const ProblemSpec& spec) {
  HOReport r;
  r.m_a = spec.a.strong_monotonicity;
  r.budget = spec.j.relaxed_monotonicity * spec.n.norm() * spec.n.norm();
  r.strong_monotonicity_ok = r.m_a > r.budget;
  if (!r.strong_monotonicity_ok) {
    r.rho = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.rho = contraction_factor(spec);
  r.contraction_ok = r.rho < 1.0;
  return r;
}

std::vector<ConstantEstimate> hypotheses_report(const ProblemSpec& spec,
                                                const SamplingOptions& opt) {
  const double horizon = spec.grid.horizon();
  std::vector<ConstantEstimate> out;
  out.push_back(estimate_dynamics_lipschitz(spec, opt));
  if (spec.f.bound) out.push_back(estimate_dynamics_bound(spec, opt));
  for (int j = 1; j <= static_cast<int>(spec.impulses.size()); ++j) {
    out.push_back(estimate_impulse_lipschitz(spec, j, opt));
  }
  out.push_back(estimate_strong_monotonicity(spec.a, horizon, opt));
  out.push_back(estimate_operator_lipschitz(spec.a, horizon, opt));
  out.push_back(estimate_growth(spec.j, horizon, opt));
  out.push_back(estimate_relaxed_monotonicity(spec.j, horizon, opt));
  out.push_back(estimate_coupling_lipschitz(spec, opt));
  out.push_back(estimate_trace_norm(spec.n, opt.seed));
  return out;
}

csv::Table estimates_table(const std::vector<ConstantEstimate>& estimates) {
  csv::Table table;
  table.header = {"constant", "declared", "observed", "samples", "verdict"};
  for (const auto& e : estimates) {
    table.add_row({e.name, csv::format_double(e.declared), csv::format_double(e.observed),
                   std::to_string(e.samples), e.verdict()});
  }
  return table;
}

}  // namespace fidhvi
