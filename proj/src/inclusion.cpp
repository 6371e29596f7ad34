#include "fidhvi/inclusion.hpp"

#include <algorithm>
#include <cmath>

namespace fidhvi {

double inclusion_margin(const MonotoneOperator& a, const TraceMap& n,
                        const NonsmoothFunctional& j) {
  const double budget = j.relaxed_monotonicity * n.norm() * n.norm();
  const double margin = a.strong_monotonicity - budget;
  if (!(margin > 0.0)) {
    throw ConstantViolation("m_A must exceed c_J ‖N‖²", a.strong_monotonicity, budget);
  }
  return margin;
}

InclusionSolver::InclusionSolver(const MonotoneOperator& a, const TraceMap& n,
                                 const NonsmoothFunctional& j, InclusionOptions options)
    : a_(a), n_(n), j_(j), options_(options) {
  if (n.cols() != a.dim || n.rows() != j.dim) {
    throw DomainError("InclusionSolver: dimensions of A, N and J do not match");
  }
  if (!(options_.tol > 0.0) || options_.max_iter < 1) {
    throw DomainError("InclusionSolver: tolerance and iteration budget must be positive");
  }
  const double margin = inclusion_margin(a, n, j);

  const Mat nnt = n.matrix() * n.matrix().transpose();
  const bool orthonormal_rows =
      (nnt - Mat::Identity(n.rows(), n.rows())).cwiseAbs().maxCoeff() <= 1e-12;
  resolvent_ = orthonormal_rows && (!j.terms.empty() || j.name == "zero");

  const double m_a = a.strong_monotonicity;
  const double l_a = std::max(a.lipschitz, m_a);
  if (resolvent_) {
    component_laws_.assign(static_cast<std::size_t>(j.dim), ScalarLaw::zero());
    component_active_.assign(static_cast<std::size_t>(j.dim), false);
    for (const auto& term : j.terms) {
      const auto c = static_cast<std::size_t>(term.component);
      component_laws_[c] = component_active_[c] ? component_laws_[c].plus(term.law) : term.law;
      component_active_[c] = true;
    }
    // One step contracts by sqrt(1 - 2λm_A + λ²L_A²) / (1 - λ c_J); pick λ
    // on a fixed grid below both poles.
    const double c = j.relaxed_monotonicity;
    const bool linear = a.matrix.size() > 0;
    double upper = linear ? 2.0 / l_a : 2.0 * m_a / (l_a * l_a);
    if (c > 0.0) upper = std::min(upper, 1.0 / c);
    constexpr int kGrid = 512;
    double best = kInfinity;
    for (int i = 1; i < kGrid; ++i) {
      const double lam = upper * i / kGrid;
      // For a symmetric linear A the forward factor is exactly max |1 - λμ|
      // over its spectrum [m_A, L_A].
      const double fwd =
          linear ? std::max(std::abs(1.0 - lam * m_a), std::abs(1.0 - lam * l_a))
                 : std::sqrt(std::max(0.0, 1.0 - 2.0 * lam * m_a + lam * lam * l_a * l_a));
      const double q = fwd / (1.0 - lam * c);
      if (q < best) {
        best = q;
        lambda_ = lam;
      }
    }
    contraction_ = best;
  } else {
    const double lip_j = std::max(j.growth, std::isfinite(j.subgradient_lipschitz)
                                                ? j.subgradient_lipschitz
                                                : 0.0);
    const double l = l_a + lip_j * n.norm() * n.norm();
    lambda_ = margin / (l * l);
    contraction_ = std::sqrt(std::max(0.0, 1.0 - margin * margin / (l * l)));
  }

  const auto n2 = static_cast<Eigen::Index>(a.dim);
  const auto ny = static_cast<Eigen::Index>(j.dim);
  ay_.resize(n2);
  v_.resize(n2);
  next_.resize(n2);
  eta_.resize(n2);
  xi_.resize(ny);
  s_.resize(ny);
  r_.resize(ny);
}

void InclusionSolver::backward(ConstVecRef v, VecRef y, VecRef eta) {
  const Mat& n = n_.matrix();
  s_.noalias() = n * v;
  for (Eigen::Index c = 0; c < s_.size(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    r_[c] = component_active_[k] ? component_laws_[k].resolvent(lambda_, s_[c]) : s_[c];
    xi_[c] = (s_[c] - r_[c]) / lambda_;
  }
  y = v;
  y.noalias() += n.transpose() * (r_ - s_);
  eta.noalias() = n.transpose() * xi_;
}

double InclusionSolver::residual(double t, ConstVecRef g, ConstVecRef y) {
  a_.apply(t, y, ay_);
  s_.noalias() = n_.matrix() * y;
  j_.subgradient(t, s_, xi_);
  eta_.noalias() = n_.matrix().transpose() * xi_;
  return (ay_ + eta_ - g).norm();
}

InclusionSolution InclusionSolver::solve(double t, ConstVecRef g, ConstVecRef y0) {
  if (g.size() != a_.dim || y0.size() != a_.dim) {
    throw DomainError("InclusionSolver: right-hand side or start has the wrong dimension");
  }
  const Mat& n = n_.matrix();
  InclusionSolution best;
  best.residual = kInfinity;

  Vec y = y0;
  if (resolvent_) {
    // Selection residual at the start; a warm start that already solves the
    // inclusion costs no iterations.
    a_.apply(t, y, ay_);
    s_.noalias() = n * y;
    j_.subgradient(t, s_, xi_);
    eta_.noalias() = n.transpose() * xi_;
  }
  for (int k = 0; k <= options_.max_iter; ++k) {
    if (!resolvent_) {
      a_.apply(t, y, ay_);
      s_.noalias() = n * y;
      j_.subgradient(t, s_, xi_);
      eta_.noalias() = n.transpose() * xi_;
    }
    v_ = ay_ + eta_ - g;
    const double res = v_.norm();
    if (!std::isfinite(res)) break;
    if (res < best.residual) {
      best.y = y;
      best.eta = eta_;
      best.residual = res;
      best.iterations = k;
    }
    if (res <= options_.tol) return best;
    if (k == options_.max_iter) break;

    if (resolvent_) {
      v_ = y - lambda_ * (ay_ - g);
      backward(v_, next_, eta_);
      if (options_.step_trace) options_.step_trace->push_back((next_ - y).norm());
      y.swap(next_);
      a_.apply(t, y, ay_);
    } else {
      next_ = y - lambda_ * v_;
      if (options_.step_trace) options_.step_trace->push_back((next_ - y).norm());
      y.swap(next_);
    }
  }
  throw InclusionNonConvergence("inclusion solve did not reach tolerance " +
                                    std::to_string(options_.tol),
                                std::move(best));
}

InclusionSolution solve_inclusion(const MonotoneOperator& a, const TraceMap& n,
                                  const NonsmoothFunctional& j, double t, ConstVecRef g,
                                  ConstVecRef y0, InclusionOptions options) {
  InclusionSolver solver(a, n, j, options);
  return solver.solve(t, g, y0);
}

double inclusion_residual(const MonotoneOperator& a, const TraceMap& n,
                          const NonsmoothFunctional& j, double t, ConstVecRef g, ConstVecRef y) {
  const Mat& nm = n.matrix();
  Vec ay(a.dim);
  a.apply(t, y, ay);
  const Vec w = g - ay;
  const Vec x = nm * y;
  const bool orthonormal_rows =
      ((nm * nm.transpose()) - Mat::Identity(n.rows(), n.rows())).cwiseAbs().maxCoeff() <= 1e-12;
  if (orthonormal_rows && (!j.terms.empty() || j.name == "zero")) {
    // ‖w - Nᵀξ‖² = ‖w - NᵀNw‖² + ‖Nw - ξ‖², minimized by clamping Nw into the box.
    std::vector<ScalarLaw> laws(static_cast<std::size_t>(j.dim), ScalarLaw::zero());
    for (const auto& term : j.terms) {
      auto& law = laws[static_cast<std::size_t>(term.component)];
      law = law.plus(term.law);
    }
    Vec lo(j.dim);
    Vec hi(j.dim);
    for (int c = 0; c < j.dim; ++c) {
      const auto [l, h] = laws[static_cast<std::size_t>(c)].subdifferential(x[c]);
      lo[c] = l;
      hi[c] = h;
    }
    const Vec nw = nm * w;
    const Vec xi = nw.cwiseMax(lo).cwiseMin(hi);
    return (w - nm.transpose() * xi).norm();
  }
  Vec xi(j.dim);
  j.subgradient(t, x, xi);
  return (w - nm.transpose() * xi).norm();
}

double inner_lipschitz_ratio(const MonotoneOperator& a, const TraceMap& n,
                             const NonsmoothFunctional& j, double t, ConstVecRef g1,
                             ConstVecRef g2, InclusionOptions options) {
  const double dg = (g1 - g2).norm();
  if (!(dg > 0.0)) throw DomainError("inner_lipschitz_ratio: right-hand sides coincide");
  InclusionSolver solver(a, n, j, options);
  const Vec start = Vec::Zero(a.dim);
  const auto s1 = solver.solve(t, g1, start);
  const auto s2 = solver.solve(t, g2, s1.y);
  return (s1.y - s2.y).norm() / dg;
}

double clarke_directional(const NonsmoothFunctional& j, double t, ConstVecRef x, ConstVecRef d) {
  if (x.size() != j.dim || d.size() != j.dim) {
    throw DomainError("clarke_directional: dimension mismatch");
  }
  const double dn = d.norm();
  if (!(dn > 0.0)) throw DomainError("clarke_directional: direction must be nonzero");
  if (j.directional) return j.directional(t, x, d);

  std::vector<Vec> shifts;
  shifts.push_back(Vec::Zero(j.dim));
  shifts.push_back(d / dn);
  shifts.push_back(-d / dn);
  for (int k = 0; k < j.dim; ++k) {
    shifts.push_back(Vec::Unit(j.dim, k));
    shifts.push_back(-Vec::Unit(j.dim, k));
  }
  // Coarser steps carry an O(μ) bias on curved pieces, so only the finest
  // step of the 1e-3..1e-7 ladder is used.
  constexpr double mu = 1e-7;
  double best = -kInfinity;
  for (const auto& p : shifts) {
    const Vec base = x + mu * p;
    best = std::max(best, (j.value(t, base + mu * d) - j.value(t, base)) / mu);
  }
  return best;
}

}  // namespace fidhvi
