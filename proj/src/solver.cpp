#include "fidhvi/solver.hpp"

#include <algorithm>
#include <cmath>

#include "fidhvi/special.hpp"

namespace fidhvi {

double contraction_factor(const ProblemSpec& spec) {
  const double margin = inclusion_margin(spec.a, spec.n, spec.j);
  const double k = spec.order;
  return std::pow(spec.grid.horizon(), k) * spec.f.lipschitz * spec.g.lipschitz /
         (k * margin * special::gamma_fn(k));
}

double sigma_lipschitz_bound(const ProblemSpec& spec) {
  const double margin = inclusion_margin(spec.a, spec.n, spec.j);
  const double k = spec.order;
  double d = 0.0;
  for (const auto& imp : spec.impulses) d += imp.lipschitz;
  return d + std::pow(spec.grid.horizon(), k) * spec.f.lipschitz *
                 (1.0 + spec.g.lipschitz / margin) / (k * special::gamma_fn(k));
}

MemoryKernel::MemoryKernel(double order, const TimeGrid& grid)
    : order_(order), size_(grid.size()) {
  if (!(order > 0.0 && order <= 1.0)) throw DomainError("MemoryKernel: order must lie in (0, 1]");
  const auto& t = grid.nodes();
  const std::size_t total = size_ * (size_ - 1) / 2;
  left_.resize(total);
  right_.resize(total);
  const double scale = 1.0 / special::gamma_fn(order);
  for (std::size_t i = 1; i < size_; ++i) {
    const std::size_t off = offset(i);
    for (std::size_t k = 0; k < i; ++k) {
      const auto m = special::interval_moments(order, t[i] - t[k], t[k + 1] - t[k]);
      left_[off + k] = scale * m.left;
      right_[off + k] = scale * m.right;
    }
  }
}

Vec MemoryKernel::integrate(const PiecewiseTrajectory& u, std::size_t i) const {
  if (u.grid().size() != size_) throw DomainError("MemoryKernel: grid size mismatch");
  Vec acc = Vec::Zero(u.dim());
  const std::size_t off = i == 0 ? 0 : offset(i);
  for (std::size_t k = 0; k < i; ++k) {
    acc.noalias() += left_[off + k] * u.right(k);
    acc.noalias() += right_[off + k] * u.left(k + 1);
  }
  return acc;
}

Vec memory_integral(const ProblemSpec& spec, const PiecewiseTrajectory& u,
                    const PiecewiseTrajectory& z, double t) {
  if (!(u.grid() == spec.grid) || !(z.grid() == spec.grid)) {
    throw DomainError("memory_integral: trajectories must live on the problem grid");
  }
  const std::size_t i = spec.grid.index_of(t);
  Vec out = spec.z0;
  Vec theta(spec.dim_z());
  for (int j = 1; j <= spec.grid.impulse_count(); ++j) {
    const std::size_t node = spec.grid.impulse_node(j);
    if (node >= i) break;
    spec.impulses[static_cast<std::size_t>(j - 1)].eval(z.left(node), theta);
    out += theta;
  }
  if (i == 0) return out;
  // Weights for this node alone; no need for the full table.
  const auto& nodes = spec.grid.nodes();
  const double scale = 1.0 / special::gamma_fn(spec.order);
  for (std::size_t k = 0; k < i; ++k) {
    const auto m =
        special::interval_moments(spec.order, nodes[i] - nodes[k], nodes[k + 1] - nodes[k]);
    out.noalias() += scale * m.left * u.right(k);
    out.noalias() += scale * m.right * u.left(k + 1);
  }
  return out;
}

std::vector<double> SolveReport::ratios() const {
  std::vector<double> r;
  for (std::size_t k = 1; k < sweep_deltas.size(); ++k) {
    r.push_back(sweep_deltas[k - 1] > 0.0 ? sweep_deltas[k] / sweep_deltas[k - 1] : 0.0);
  }
  return r;
}

csv::Table SolveReport::convergence_table() const {
  csv::Table table;
  table.header = {"sweep", "sup_delta", "max_inner_residual"};
  for (std::size_t k = 0; k < sweep_deltas.size(); ++k) {
    table.add_row({std::to_string(k + 1), csv::format_double(sweep_deltas[k]),
                   csv::format_double(sweep_inner_residuals[k])});
  }
  return table;
}

PiecewiseTrajectory solve_inner(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                                const InclusionOptions& options,
                                const PiecewiseTrajectory* warm, double* max_residual) {
  if (!(z.grid() == spec.grid)) throw DomainError("solve_inner: z is not on the problem grid");
  if (warm && !(warm->grid() == spec.grid)) {
    throw DomainError("solve_inner: warm start is not on the problem grid");
  }
  InclusionSolver solver(spec.a, spec.n, spec.j, options);
  TrajectoryBuilder out(spec.grid, spec.dim_y());
  const auto& t = spec.grid.nodes();
  Vec g(spec.dim_y());
  Vec prev = Vec::Zero(spec.dim_y());
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    spec.g.eval(t[i], z.left(i), g);
    const auto left = solver.solve(t[i], g, warm ? warm->left(i) : prev);
    out.set_value(i, left.y);
    worst = std::max(worst, left.residual);
    prev = left.y;
    if (const auto j = spec.grid.impulse_at(i)) {
      spec.g.eval(t[i], z.right(i), g);
      const auto right = solver.solve(t[i], g, warm ? warm->right(i) : prev);
      out.set_right_limit(*j, right.y);
      worst = std::max(worst, right.residual);
      prev = right.y;
    }
  }
  if (max_residual) *max_residual = worst;
  return std::move(out).build();
}

PiecewiseTrajectory dynamics_samples(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                                     const PiecewiseTrajectory& y) {
  TrajectoryBuilder out(spec.grid, spec.dim_z());
  const auto& t = spec.grid.nodes();
  Vec v(spec.dim_z());
  for (std::size_t i = 0; i < t.size(); ++i) {
    spec.f.eval(t[i], z.left(i), y.left(i), v);
    out.set_value(i, v);
    if (const auto j = spec.grid.impulse_at(i)) {
      spec.f.eval(t[i], z.right(i), y.right(i), v);
      out.set_right_limit(*j, v);
    }
  }
  return std::move(out).build();
}

namespace {

// One application of the integral equation to (z, y). With `fresh_impulses`
// each Θ_j acts on the left limit just computed instead of the old one.
PiecewiseTrajectory sweep(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                          const PiecewiseTrajectory& y, const MemoryKernel& kernel,
                          bool fresh_impulses) {
  const auto u = dynamics_samples(spec, z, y);
  TrajectoryBuilder out(spec.grid, spec.dim_z());
  Vec base = spec.z0;
  Vec theta(spec.dim_z());
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    Vec value = base + kernel.integrate(u, i);
    if (const auto j = spec.grid.impulse_at(i)) {
      spec.impulses[static_cast<std::size_t>(*j - 1)].eval(fresh_impulses ? value : z.left(i),
                                                           theta);
      base += theta;
      out.set_right_limit(*j, value + theta);
    }
    out.set_value(i, value);
  }
  return std::move(out).build();
}

std::shared_ptr<const MemoryKernel> kernel_for(const ProblemSpec& spec,
                                               const std::shared_ptr<const MemoryKernel>& given) {
  if (given) {
    if (given->size() != spec.grid.size() || given->order() != spec.order) {
      throw DomainError("picard_solve: supplied kernel does not match the problem");
    }
    return given;
  }
  return std::make_shared<const MemoryKernel>(spec.order, spec.grid);
}

}  // namespace

PiecewiseTrajectory sigma_map(const ProblemSpec& spec, const PiecewiseTrajectory& z,
                              const InclusionOptions& options, const MemoryKernel* kernel) {
  std::optional<MemoryKernel> own;
  if (!kernel) kernel = &own.emplace(spec.order, spec.grid);
  const auto y = solve_inner(spec, z, options);
  return sweep(spec, z, y, *kernel, false);
}

SolveReport picard_solve(const ProblemSpec& spec, const SolveOptions& options) {
  spec.validate();
  if (!(options.tol > 0.0) || options.max_sweeps < 1) {
    throw DomainError("picard_solve: tolerance and sweep budget must be positive");
  }
  const double rho = contraction_factor(spec);
  if (!(rho < 1.0)) throw ConstantViolation("contraction factor must be below 1", rho, 1.0);
  const auto kernel = kernel_for(spec, options.kernel);

  PiecewiseTrajectory z = options.initial ? *options.initial
                                          : PiecewiseTrajectory::constant(spec.grid, spec.z0);
  if (!(z.grid() == spec.grid) || z.dim() != spec.dim_z()) {
    throw DomainError("picard_solve: initial iterate does not match the problem");
  }
  double inner_res = 0.0;
  PiecewiseTrajectory y = solve_inner(spec, z, options.inner, nullptr, &inner_res);

  SolveReport report{.z = z, .y = y, .picard_iterations = 0, .sweep_deltas = {},
                     .sweep_inner_residuals = {}};
  report.contraction_factor = rho;
  report.order_is_one = spec.order == 1.0;

  int rising = 0;
  for (int s = 1; s <= options.max_sweeps; ++s) {
    auto z_next = sweep(spec, z, y, *kernel, true);
    const double delta = sup_distance(z_next, z);
    auto y_next = solve_inner(spec, z_next, options.inner, &y, &inner_res);
    z = std::move(z_next);
    y = std::move(y_next);
    report.sweep_deltas.push_back(delta);
    report.sweep_inner_residuals.push_back(inner_res);
    report.picard_iterations = s;

    if (delta <= options.tol) {
      report.z = std::move(z);
      report.y = std::move(y);
      report.max_inclusion_residual = inner_res;
      report.integral_equation_residual = residual_check(spec, report, kernel.get()).r_z;
      return report;
    }
    const std::size_t n = report.sweep_deltas.size();
    if (n >= 2 && delta > report.sweep_deltas[n - 2]) {
      if (++rising >= 3) {
        report.z = std::move(z);
        report.y = std::move(y);
        report.max_inclusion_residual = inner_res;
        throw SolveNonConvergence("Picard sweeps grew for three consecutive sweeps",
                                  std::move(report));
      }
    } else {
      rising = 0;
    }
  }
  report.z = std::move(z);
  report.y = std::move(y);
  report.max_inclusion_residual = inner_res;
  throw SolveNonConvergence("Picard iteration did not reach tolerance within the sweep budget",
                            std::move(report));
}

ResidualReport residual_check(const ProblemSpec& spec, const SolveReport& report,
                              const MemoryKernel* kernel) {
  if (!(report.z.grid() == spec.grid) || !(report.y.grid() == spec.grid)) {
    throw DomainError("residual_check: report grid differs from the problem grid");
  }
  std::optional<MemoryKernel> own;
  if (!kernel) kernel = &own.emplace(spec.order, spec.grid);
  const auto& z = report.z;
  const auto& y = report.y;

  ResidualReport out;
  out.r_z = sup_distance(sweep(spec, z, y, *kernel, false), z);

  const auto& t = spec.grid.nodes();
  Vec g(spec.dim_y());
  for (std::size_t i = 0; i < t.size(); ++i) {
    spec.g.eval(t[i], z.left(i), g);
    out.r_y = std::max(out.r_y, inclusion_residual(spec.a, spec.n, spec.j, t[i], g, y.left(i)));
    if (spec.grid.impulse_at(i)) {
      spec.g.eval(t[i], z.right(i), g);
      out.r_y =
          std::max(out.r_y, inclusion_residual(spec.a, spec.n, spec.j, t[i], g, y.right(i)));
    }
  }

  // Remove the jumps to get the continuous part w = z0 + I^κ f, whose Caputo
  // derivative is f.
  const int dim = spec.dim_z();
  std::vector<std::vector<double>> w(static_cast<std::size_t>(dim),
                                     std::vector<double>(t.size()));
  Vec shift = Vec::Zero(dim);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int c = 0; c < dim; ++c) w[static_cast<std::size_t>(c)][i] = z.left(i)[c] - shift[c];
    if (spec.grid.impulse_at(i)) shift += z.right(i) - z.left(i);
  }
  std::vector<std::vector<double>> dw;
  for (const auto& comp : w) dw.push_back(special::caputo_l1_general(t, comp, spec.order));

  const double guard = kCaputoGuardFraction * spec.grid.horizon();
  const auto u = dynamics_samples(spec, z, y);
  double last_break = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] - last_break >= guard) {
      double err = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double d = dw[static_cast<std::size_t>(c)][i] - u.left(i)[c];
        err += d * d;
      }
      out.caputo = std::max(out.caputo, std::sqrt(err));
      ++out.caputo_nodes;
    }
    if (spec.grid.impulse_at(i)) last_break = t[i];
  }
  return out;
}

PiecewiseTrajectory gronwall_envelope(double k1, double k2, const std::vector<double>& d,
                                      double order, const TimeGrid& grid) {
  if (!(k1 >= 0.0) || !(k2 >= 0.0)) {
    throw DomainError("gronwall_envelope: k1 and k2 must be nonnegative");
  }
  double dstar = 0.0;
  for (double dj : d) {
    if (!(dj >= 0.0)) throw DomainError("gronwall_envelope: d_j must be nonnegative");
    dstar = std::max(dstar, dj);
  }
  const double scale = k2 * special::gamma_fn(order);
  TrajectoryBuilder out(grid, 1);
  const auto& t = grid.nodes();
  Vec v(1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = special::mittag_leffler(order, scale * std::pow(t[i], order)).value;
    const double factor = 1.0 + dstar * e;
    const int j = grid.subinterval(i);
    v[0] = k1 * std::pow(factor, j) * e;
    out.set_value(i, v);
    if (const auto jj = grid.impulse_at(i)) {
      v[0] = k1 * std::pow(factor, *jj) * e;
      out.set_right_limit(*jj, v);
    }
  }
  return std::move(out).build();
}

}  // namespace fidhvi
