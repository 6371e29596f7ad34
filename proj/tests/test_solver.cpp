#include <doctest.h>

#include <cmath>
#include <random>

#include "fidhvi/errors.hpp"
#include "fidhvi/presets.hpp"
#include "fidhvi/solver.hpp"
#include "fidhvi/special.hpp"
#include "oracles.hpp"

using namespace fidhvi;

namespace {

const std::vector<std::string> kShipped = {"zero_dynamics", "scalar_decay", "linear_decay",
                                           "impulsive_linear", "friction_2d", "contact_rod"};

int subintervals(const std::string& preset) {
  return build_preset(preset, {}, 8).grid.impulse_count() + 1;
}

ProblemSpec preset_with_nodes(const std::string& preset, int nodes,
                              const PresetOverrides& o = {}) {
  return build_preset(preset, o, nodes / subintervals(preset));
}

// Sup over the coarse grid's nodes (and right limits) of fine - coarse.
double coarse_distance(const PiecewiseTrajectory& fine, const PiecewiseTrajectory& coarse) {
  const auto& g = coarse.grid();
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = fine.grid().index_of(g.nodes()[i]);
    d = std::max(d, (fine.left(k) - coarse.left(i)).norm());
    d = std::max(d, (fine.right(k) - coarse.right(i)).norm());
  }
  return d;
}

PiecewiseTrajectory random_trajectory(const TimeGrid& g, int dim, std::mt19937_64& rng,
                                      double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  TrajectoryBuilder b(g, dim);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = u(rng);
    b.set_value(i, v);
  }
  for (int j = 1; j <= g.impulse_count(); ++j) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = u(rng);
    b.set_right_limit(j, v);
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("contraction factor examples") {
  CHECK(contraction_factor(build_preset("zero_dynamics")) == 0.0);
  CHECK(contraction_factor(build_preset("linear_decay")) == doctest::Approx(0.0752252778).epsilon(1e-9));
  PresetOverrides o;
  o.values = {{"order", 1.0}, {"lambda", 1.0}, {"a", 2.0}};
  CHECK(contraction_factor(build_preset("scalar_decay", o)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(contraction_factor(build_preset("violate_HO")), ConstantViolation);
}

TEST_CASE("memory integral examples") {
  const auto spec = build_preset("zero_dynamics", {}, 64);
  const auto& g = spec.grid;
  const auto zero = PiecewiseTrajectory::constant(g, Vec::Zero(1));
  const auto one = PiecewiseTrajectory::constant(g, Vec::Ones(1));
  for (double t : {0.0, 0.25, 1.0}) CHECK(memory_integral(spec, zero, one, t)[0] == 1.0);

  ProblemSpec s0 = spec;
  s0.z0 = Vec::Zero(1);
  CHECK(memory_integral(s0, one, zero, 1.0)[0] ==
        doctest::Approx(1.0 / special::gamma_fn(1.5)).epsilon(1e-10));

  PresetOverrides o;
  o.values = {{"jump_scale", 0.0}, {"jump_shift", 1.0}, {"z0", 0.0}};
  o.impulse_times = std::vector<double>{0.5};
  const auto imp = build_preset("impulsive_linear", o, 16);
  const auto z = PiecewiseTrajectory::constant(imp.grid, Vec::Zero(1));
  const auto u = PiecewiseTrajectory::constant(imp.grid, Vec::Zero(1));
  CHECK(memory_integral(imp, u, z, 0.25)[0] == 0.0);
  CHECK(memory_integral(imp, u, z, 0.5)[0] == 0.0);
  CHECK(memory_integral(imp, u, z, 0.53125)[0] == 1.0);
  CHECK(memory_integral(imp, u, z, 1.0)[0] == 1.0);
  CHECK_THROWS_AS(memory_integral(imp, u, z, 0.3), DomainError);
}

TEST_CASE("memory kernel: weights per target sum to the kernel moment") {
  const auto g = TimeGrid::uniform(2.0, {0.6, 1.1}, 20);
  for (double k : {0.3, 0.5, 1.0}) {
    const MemoryKernel mk(k, g);
    for (std::size_t i = 1; i < g.size(); ++i) {
      double s = 0.0;
      for (std::size_t q = 0; q < i; ++q) s += mk.left(i, q) + mk.right(i, q);
      CHECK(s == doctest::Approx(std::pow(g.nodes()[i], k) / special::gamma_fn(k + 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero dynamics give the constant trajectory after one sweep") {
  const auto spec = build_preset("zero_dynamics", {{{"z0", 3.5}}, {}}, 64);
  const auto rep = picard_solve(spec);
  CHECK(rep.picard_iterations == 1);
  CHECK(sup_distance(rep.z, PiecewiseTrajectory::constant(spec.grid, Vec::Constant(1, 3.5))) == 0.0);
  const auto r = residual_check(spec, rep);
  CHECK(r.r_z == 0.0);
  CHECK(r.r_y <= InclusionOptions{}.tol);
}

TEST_CASE("scalar decay matches E_1/2(-t^1/2) and converges at the expected rate") {
  const double ref = std::exp(1.0) * oracle::erfc_series(1.0);
  CHECK(ref == doctest::Approx(0.4275835762).epsilon(1e-9));
  double errors[2];
  int idx = 0;
  for (int nodes : {2048, 4096}) {
    const auto spec = build_preset("scalar_decay", {}, nodes);
    const auto rep = picard_solve(spec);
    errors[idx++] = std::abs(rep.z.left(spec.grid.size() - 1)[0] - ref);
  }
  CHECK(errors[0] <= 2e-3);
  CHECK(errors[0] / errors[1] >= 1.8);
}

TEST_CASE("impulsive linear preset follows the closed-form impulsive Mittag-Leffler solution") {
  const auto spec = build_preset("impulsive_linear", {}, 512);
  const auto rep = picard_solve(spec);
  // y = z / (a - c) eliminates the inclusion: f = -rate (1 + 1/1.5) z.
  const double lambda = 0.1 * (1.0 + 1.0 / 1.5);
  double err = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); i += 16) {
    const double t = spec.grid.nodes()[i];
    err = std::max(err, std::abs(rep.z.left(i)[0] -
                                 oracle::impulsive_ml(0.5, lambda, 1.0, {0.3, 0.7}, 0.25, 0.1, t)));
  }
  CHECK(err <= 1e-3);
}

TEST_CASE("jumps equal the impulse map at the left limit to rounding") {
  for (const auto& name : {"impulsive_linear", "friction_2d", "contact_rod"}) {
    const auto spec = build_preset(name, {}, 128);
    const auto rep = picard_solve(spec);
    for (int j = 1; j <= spec.grid.impulse_count(); ++j) {
      Vec theta(spec.dim_z());
      spec.impulses[j - 1].eval(rep.z.left(spec.grid.impulse_node(j)), theta);
      CAPTURE(name);
      CHECK((rep.z.jump(j) - theta).norm() <= 1e-14);
    }
  }
}

TEST_CASE("residual check") {
  const auto spec = build_preset("linear_decay", {}, 2048);
  auto rep = picard_solve(spec);
  const auto r = residual_check(spec, rep);
  CHECK(r.r_z <= 1e-6);
  CHECK(r.r_y <= 1e-8);
  CHECK(r.caputo <= 5e-3);
  CHECK(r.caputo_nodes > 1000);

  std::vector<Vec> values = rep.z.node_values();
  values[1000][0] += 1e-3;
  rep.z = PiecewiseTrajectory(spec.grid, 1, values, rep.z.right_limits());
  CHECK(residual_check(spec, rep).r_z >= 5e-4);
}

TEST_CASE("shipped presets solve with small residuals") {
  for (const auto& name : kShipped) {
    const auto spec = preset_with_nodes(name, 1024);
    const auto rep = picard_solve(spec);
    const auto r = residual_check(spec, rep);
    CAPTURE(name);
    CHECK(r.r_z <= 1e-6);
    CHECK(r.r_y <= 1e-8);
    CHECK(r.caputo <= 5e-3);
    CHECK(rep.max_inclusion_residual <= 1e-8);
  }
}

TEST_CASE("solves are bit-for-bit reproducible") {
  const auto spec = build_preset("friction_2d", {}, 128);
  const auto a = picard_solve(spec);
  const auto b = picard_solve(spec);
  CHECK(a.z.node_values() == b.z.node_values());
  CHECK(a.y.node_values() == b.y.node_values());
  CHECK(a.sweep_deltas == b.sweep_deltas);
}

TEST_CASE("solver refuses rho >= 1 and reports exhausted sweeps") {
  CHECK_THROWS_AS(picard_solve(build_preset("scalar_decay", {{{"lambda", 10.0}}, {}}, 32)),
                  ConstantViolation);
  SolveOptions o;
  o.max_sweeps = 2;
  try {
    picard_solve(build_preset("linear_decay", {}, 64), o);
    FAIL("expected SolveNonConvergence");
  } catch (const SolveNonConvergence& e) {
    CHECK(e.best().picard_iterations == 2);
    CHECK(e.iterations() == 2);
    CHECK(e.best_residual() > o.tol);
  }
}

TEST_CASE("convergence log") {
  const auto rep = picard_solve(build_preset("linear_decay", {}, 64));
  const auto t = rep.convergence_table();
  CHECK(t.header == std::vector<std::string>{"sweep", "sup_delta", "max_inner_residual"});
  CHECK(t.rows.size() == static_cast<std::size_t>(rep.picard_iterations));
  CHECK(rep.sweep_deltas.back() <= 1e-10);
  CHECK(rep.ratios().size() + 1 == rep.sweep_deltas.size());
}

TEST_CASE("Gronwall envelope examples") {
  const auto g = TimeGrid::uniform(1.0, {0.3, 0.6}, 10);
  auto e = gronwall_envelope(2.0, 0.0, {0.0, 0.0}, 0.5, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(e.left(i)[0] == 2.0);

  e = gronwall_envelope(1.0, 0.0, {0.5, 0.5}, 0.5, g);
  CHECK(e.left(g.size() - 1)[0] == doctest::Approx(2.25));
  CHECK(e.left(g.impulse_node(1))[0] == doctest::Approx(1.0));
  CHECK(e.right(g.impulse_node(1))[0] == doctest::Approx(1.5));

  const auto g1 = TimeGrid::uniform(1.0, {}, 10);
  e = gronwall_envelope(1.0, 1.0, {}, 1.0, g1);
  CHECK(e.left(g1.size() - 1)[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(gronwall_envelope(-1.0, 0.0, {}, 0.5, g1), DomainError);
}

TEST_CASE("contraction certificate: f through y only, rho is the sup-norm constant of Sigma") {
  auto spec = build_preset("linear_decay", {}, 1024);
  spec.f.eval = [](double, ConstVecRef, ConstVecRef y, VecRef out) { out[0] = -0.5 * y[0]; };
  spec.f.lipschitz = 0.5;
  const double rho = contraction_factor(spec);
  const MemoryKernel kernel(spec.order, spec.grid);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto z1 = random_trajectory(spec.grid, 1, rng, 2.0);
    const auto z2 = random_trajectory(spec.grid, 1, rng, 2.0);
    const double ratio = sup_distance(sigma_map(spec, z1, {}, &kernel), sigma_map(spec, z2, {}, &kernel)) /
                         sup_distance(z1, z2);
    CHECK(ratio <= 1.1 * rho);
  }
}

TEST_CASE("Sigma is Lipschitz with the full bound on every shipped preset") {
  std::mt19937_64 rng(23);
  for (const auto& name : kShipped) {
    const auto spec = preset_with_nodes(name, 1024);
    const MemoryKernel kernel(spec.order, spec.grid);
    const double bound = sigma_lipschitz_bound(spec);
    for (int trial = 0; trial < 4; ++trial) {
      const auto z1 = random_trajectory(spec.grid, spec.dim_z(), rng, 2.0);
      const auto z2 = random_trajectory(spec.grid, spec.dim_z(), rng, 2.0);
      const double ratio = sup_distance(sigma_map(spec, z1, {}, &kernel),
                                        sigma_map(spec, z2, {}, &kernel)) /
                           sup_distance(z1, z2);
      CAPTURE(name);
      CHECK(ratio <= bound * (1 + 1e-9));
    }
  }
}

TEST_CASE("inner Lipschitz chain along trajectories") {
  std::mt19937_64 rng(29);
  for (const auto& name : {"linear_decay", "friction_2d", "contact_rod"}) {
    const auto spec = build_preset(name, {}, 64);
    const double m = spec.a.strong_monotonicity -
                     spec.j.relaxed_monotonicity * spec.n.norm() * spec.n.norm();
    const InclusionOptions opt;
    for (int trial = 0; trial < 5; ++trial) {
      const auto z1 = random_trajectory(spec.grid, spec.dim_z(), rng, 1.0);
      const auto z2 = random_trajectory(spec.grid, spec.dim_z(), rng, 1.0);
      const auto y1 = solve_inner(spec, z1, opt);
      const auto y2 = solve_inner(spec, z2, opt);
      CAPTURE(name);
      CHECK(sup_distance(y1, y2) <= spec.g.lipschitz / m * sup_distance(z1, z2) + 10 * opt.tol);
    }
  }
}

TEST_CASE("order one agrees with an adaptive Dormand-Prince integration") {
  PresetOverrides o;
  o.values = {{"order", 1.0}};
  for (const auto& name : {"zero_dynamics", "scalar_decay", "linear_decay"}) {
    const auto spec = build_preset(name, o, 2048);
    const auto rep = picard_solve(spec);
    CHECK(rep.order_is_one);
    // Closed-form elimination of y: linear_decay has y = z / (a - c).
    const double rate = std::string(name) == "zero_dynamics" ? 0.0
                        : std::string(name) == "scalar_decay" ? 1.0
                                                              : 0.1 * (1.0 + 1.0 / 1.5);
    const auto ref = oracle::dopri5(
        [rate](double, const std::vector<double>& z, std::vector<double>& dz) { dz[0] = -rate * z[0]; },
        {1.0}, spec.grid.nodes());
    double err = 0.0;
    for (std::size_t i = 0; i < spec.grid.size(); ++i) err = std::max(err, std::abs(rep.z.left(i)[0] - ref[i][0]));
    CAPTURE(name);
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("refinement: successive solutions move closer together") {
  for (const auto& name : kShipped) {
    std::vector<double> dist;
    std::optional<SolveReport> prev;
    for (int steps : {32, 64, 128, 256, 512}) {
      auto rep = picard_solve(build_preset(name, {}, steps));
      if (prev) dist.push_back(coarse_distance(rep.z, prev->z));
      prev = std::move(rep);
    }
    CAPTURE(name);
    for (std::size_t k = 1; k < dist.size(); ++k) CHECK(dist[k] <= dist[k - 1]);
  }
}
