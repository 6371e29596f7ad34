#include "fidhvi/perturbation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

#include "fidhvi/errors.hpp"
#include "fidhvi/special.hpp"

namespace fidhvi {

PerturbationFamily linear_shift_family(const ProblemSpec& spec, const Vec& b) {
  if (b.size() != spec.j.dim) throw DomainError("linear_shift_family: b has the wrong dimension");
  PerturbationFamily fam;
  fam.name = "linear_shift";
  const NonsmoothFunctional base = spec.j;
  fam.make = [base, b](double delta) {
    if (delta == 0.0) return base;
    std::vector<LawTerm> extra;
    for (int c = 0; c < b.size(); ++c) {
      if (b[c] != 0.0) extra.push_back(LawTerm{c, ScalarLaw::linear(delta * b[c])});
    }
    return base.with_terms(extra);
  };
  const double scale = spec.n.norm() * b.norm();
  fam.modulus = [scale](double delta) { return delta * scale; };
  // Halfway between the budget and m_A; adding a linear term leaves c_J alone.
  const double budget = spec.j.relaxed_monotonicity * spec.n.norm() * spec.n.norm();
  fam.m_a0 = 0.5 * (spec.a.strong_monotonicity + budget);
  return fam;
}

double PerturbationStudy::z_slope() const {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.delta > 0.0) {
      x.push_back(r.delta);
      y.push_back(r.sup_z_err);
    }
  }
  return loglog_slope(x, y);
}

csv::Table PerturbationStudy::table() const {
  csv::Table t;
  t.header = {"delta", "V_delta", "sup_z_err", "sup_y_err", "gronwall_ceiling", "y_bound"};
  for (const auto& r : rows) {
    t.add_row({csv::format_double(r.delta), csv::format_double(r.v_delta),
               csv::format_double(r.sup_z_err), csv::format_double(r.sup_y_err),
               csv::format_double(r.gronwall_ceiling), csv::format_double(r.y_bound)});
  }
  return t;
}

double y_error_bound(double v_delta, double sup_z_err, double m_a, double c_j, double n_norm,
                     double m_g) {
  const double m = m_a - c_j * n_norm * n_norm;
  if (!(m > 0.0)) throw ConstantViolation("m_A must exceed c_J ‖N‖²", m_a, c_j * n_norm * n_norm);
  return v_delta / m + m_g / m * sup_z_err;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("loglog_slope: need at least two matching points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("loglog_slope: x values must not all coincide");
  return (n * sxy - sx * sy) / den;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& work) {
  std::vector<std::exception_ptr> errors(count);
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void validate_family(const ProblemSpec& spec, const PerturbationFamily& family,
                     const std::vector<double>& deltas, const SamplingOptions& sampling) {
  if (!family.make || !family.modulus) {
    throw DomainError("perturbation family " + family.name + " is incomplete");
  }
  if (deltas.empty()) throw DomainError("perturbation study needs at least one delta");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] >= 0.0 && deltas[i] <= 1.0)) {
      throw DomainError("perturbation deltas must lie in [0, 1]");
    }
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw DomainError("perturbation deltas must be strictly decreasing");
    }
  }
  double prev_v = kInfinity;
  for (double d : deltas) {
    const double v = family.modulus(d);
    if (!(v >= 0.0) || v > prev_v) {
      throw ConstantViolation("V(delta) must be nonnegative and nonincreasing as delta decreases",
                              v, prev_v);
    }
    prev_v = v;
  }

  const double n2 = spec.n.norm() * spec.n.norm();
  if (!(spec.a.strong_monotonicity > family.m_a0)) {
    throw ConstantViolation("m_A must exceed m_A0", spec.a.strong_monotonicity, family.m_a0);
  }

  const Mat& n = spec.n.matrix();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    const NonsmoothFunctional jd = family.make(d);
    if (jd.dim != spec.j.dim) throw DomainError("perturbed functional has the wrong dimension");
    if (!(family.m_a0 > jd.relaxed_monotonicity * n2)) {
      throw ConstantViolation("m_A0 must exceed c_Jdelta ‖N‖² at delta " + csv::format_double(d),
                              family.m_a0, jd.relaxed_monotonicity * n2);
    }
    // Sampled closeness of the perturbed subgradients, compared after Nᵀ.
    PairSampler s(sampling.seed + i, sampling.radius);
    const double v = family.modulus(d);
    Vec xi(spec.j.dim), xid(spec.j.dim);
    for (int k = 0; k < sampling.samples; ++k) {
      const double t = s.uniform(0.0, spec.grid.horizon());
      // Alternate full-ball points with points near the origin, where
      // state-scaled bounds are tightest.
      Vec y = s.in_ball(spec.dim_y());
      if (k % 2 == 1) y *= std::pow(10.0, -6.0 * s.uniform(0.0, 1.0));
      const Vec x = n * y;
      spec.j.subgradient(t, x, xi);
      jd.subgradient(t, x, xid);
      const double diff = (n.transpose() * (xi - xid)).norm();
      const double allowed = family.state_scaled ? v * spec.n.norm() * x.norm() : v;
      if (diff > allowed * (1.0 + 1e-9) + 1e-14) {
        throw ConstantViolation("perturbation family " + family.name +
                                    " breaks its modulus bound at delta " + csv::format_double(d),
                                diff, allowed);
      }
    }
  }
}

PerturbationStudy run_perturbation_study(const ProblemSpec& spec,
                                         const PerturbationFamily& family,
                                         const std::vector<double>& deltas,
                                         const PerturbationOptions& options) {
  spec.validate();
  validate_family(spec, family, deltas, options.sampling);

  const double m = inclusion_margin(spec.a, spec.n, spec.j);
  const double k = spec.order;
  const double horizon = spec.grid.horizon();
  const double m1 = spec.f.lipschitz;
  const double gk = special::gamma_fn(k);
  std::vector<double> d;
  for (const auto& imp : spec.impulses) d.push_back(imp.lipschitz);

  SolveOptions solve = options.solve;
  if (!solve.kernel) solve.kernel = std::make_shared<const MemoryKernel>(spec.order, spec.grid);

  PerturbationStudy study{.rows = {}, .base = picard_solve(spec, solve)};
  study.k2 = m1 * (spec.g.lipschitz / m + 1.0) / gk;
  study.solver_slack = 10.0 * (solve.tol + solve.inner.tol);

  std::vector<std::optional<PerturbationRow>> rows(deltas.size());
  parallel_for(deltas.size(), options.threads, [&](std::size_t i) {
    ProblemSpec sd = spec;
    sd.j = family.make(deltas[i]);
    const auto rep = picard_solve(sd, solve);
    PerturbationRow row;
    row.delta = deltas[i];
    row.sweeps = rep.picard_iterations;
    row.sup_z_err = sup_distance(rep.z, study.base.z);
    row.sup_y_err = sup_distance(rep.y, study.base.y);
    const double vbar = family.modulus(deltas[i]);
    row.v_delta = family.state_scaled
                      ? spec.n.norm() * spec.n.norm() * family.measure * rep.y.sup_norm() * vbar
                      : vbar;
    const double k1 = std::pow(horizon, k) * m1 * row.v_delta / (k * gk * m);
    const auto env = gronwall_envelope(k1, study.k2, d, k, spec.grid);
    row.gronwall_ceiling = env.left(spec.grid.size() - 1)[0];
    row.y_bound = y_error_bound(row.v_delta, row.sup_z_err, spec.a.strong_monotonicity,
                                spec.j.relaxed_monotonicity, spec.n.norm(), spec.g.lipschitz);
    rows[i] = row;
  });
  for (auto& r : rows) study.rows.push_back(*r);
  return study;
}

}  // namespace fidhvi
