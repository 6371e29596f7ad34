#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fidhvi/errors.hpp"
#include "fidhvi/functional.hpp"
#include "fidhvi/inclusion.hpp"

using namespace fidhvi;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

NonsmoothFunctional single(const ScalarLaw& law) {
  return NonsmoothFunctional::separable(1, {LawTerm{0, law}});
}

Mat random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = g(rng);
  return m * m.transpose() + 0.5 * Mat::Identity(n, n);
}

}  // namespace

TEST_CASE("scalar laws: subdifferentials and constants") {
  const auto a = ScalarLaw::absolute(1.0);
  CHECK(a.subdifferential(0.0) == std::pair{-1.0, 1.0});
  CHECK(a.selection(0.0) == 0.0);
  CHECK(a.is_kink(0.0));
  CHECK_FALSE(a.is_kink(0.3));
  CHECK(a.value(-2.0) == 2.0);
  CHECK(a.relaxed_monotonicity() == 0.0);
  CHECK(a.growth() == 1.0);

  const auto q = ScalarLaw::quadratic(-0.5);
  CHECK(q.value(2.0) == doctest::Approx(-1.0));
  CHECK(q.relaxed_monotonicity() == 0.5);
  CHECK(q.derivative_lipschitz() == 0.5);

  const auto nc = ScalarLaw::normal_compliance(1.0, 0.05, 0.1, 0.2);
  CHECK(nc.relaxed_monotonicity() == doctest::Approx(0.2));
  CHECK(nc.selection(-1.0) == 0.0);
  CHECK(nc.selection(0.05) == doctest::Approx(0.05));
  CHECK(nc.selection(0.15) == doctest::Approx(0.03));
  CHECK(nc.selection(1.15) == doctest::Approx(1.03));

  const auto fr = ScalarLaw::friction_weakening(0.2, 0.05, 1.0, 0.2);
  CHECK(fr.relaxed_monotonicity() == doctest::Approx(0.2));
  CHECK(fr.selection(0.05) == doctest::Approx(0.2));
  CHECK(fr.selection(1.0) == doctest::Approx(0.16));
  CHECK(fr.selection(-1.0) == doctest::Approx(-0.16));
  CHECK_THROWS_AS(ScalarLaw::friction_weakening(0.2, 0.05, 5.0, 0.2), DomainError);

  const auto st = ScalarLaw::sawtooth(1.0, 0.25, 4);
  CHECK(st.relaxed_monotonicity() == kInfinity);
  CHECK(st.derivative_lipschitz() == kInfinity);
}

TEST_CASE("scalar law potentials are continuous across breakpoints") {
  for (const auto& law : {ScalarLaw::normal_compliance(1.0, 0.05, 0.1, 0.2),
                          ScalarLaw::friction_weakening(0.5, 0.05, 1.0, 0.5),
                          ScalarLaw::sawtooth(0.5, 0.25, 3)}) {
    for (double b : law.breakpoints()) {
      CHECK(law.value(b - 1e-9) == doctest::Approx(law.value(b + 1e-9)).epsilon(1e-7));
    }
  }
}

TEST_CASE("resolvent solves r + lambda dj(r) = s exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& law : {ScalarLaw::absolute(0.7), ScalarLaw::quadratic(-0.5),
                          ScalarLaw::normal_compliance(1.0, 0.05, 0.1, 0.2),
                          ScalarLaw::friction_weakening(0.5, 0.05, 1.0, 0.5)}) {
    const double lambda = 0.9 / std::max(1.0, law.relaxed_monotonicity());
    for (int i = 0; i < 200; ++i) {
      const double s = u(rng);
      const double r = law.resolvent(lambda, s);
      const auto [lo, hi] = law.subdifferential(r);
      const double xi = (s - r) / lambda;
      CAPTURE(law.name());
      CAPTURE(s);
      CHECK(xi >= lo - 1e-12);
      CHECK(xi <= hi + 1e-12);
    }
  }
  CHECK_THROWS_AS(ScalarLaw::quadratic(-0.5).resolvent(2.0, 1.0), DomainError);
}

TEST_CASE("separable constants sum per component") {
  const auto j = NonsmoothFunctional::separable(
      2, {LawTerm{0, ScalarLaw::quadratic(-0.5)}, LawTerm{0, ScalarLaw::absolute(1.0)},
          LawTerm{1, ScalarLaw::quadratic(-0.25)}});
  CHECK(j.relaxed_monotonicity == 0.5);
  CHECK(j.value(0.0, Vec{{2.0, 2.0}}) == doctest::Approx(-1.0 + 2.0 - 0.5));
  const auto single_dim =
      NonsmoothFunctional::separable(1, {LawTerm{0, ScalarLaw::absolute(2.0)}});
  CHECK(single_dim.growth == 2.0);
  CHECK_THROWS_AS(NonsmoothFunctional::separable(1, {LawTerm{1, ScalarLaw::zero()}}), DomainError);
}

TEST_CASE("trace map norm is the largest singular value") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Mat m(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = g(rng);
  const TraceMap n(m);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec top = svd.matrixV().col(0);
  CHECK((m * top).norm() == doctest::Approx(n.norm()).epsilon(1e-8));
  for (int i = 0; i < 100; ++i) {
    Vec x(4);
    for (int k = 0; k < 4; ++k) x[k] = g(rng);
    CHECK((m * x).norm() <= n.norm() * x.norm() * (1 + 1e-12));
  }
  CHECK_THROWS_AS(TraceMap(Mat::Zero(1, 3)), DomainError);
  CHECK_THROWS_AS(TraceMap(Mat::Identity(3, 2)), DomainError);
}

TEST_CASE("solve_inclusion examples") {
  const auto a = MonotoneOperator::scaled_identity(1, 2.0);
  const auto n = TraceMap::identity(1);

  auto s = solve_inclusion(a, n, NonsmoothFunctional::zero(1), 0.0, scalar(1.0), scalar(0.0));
  CHECK(s.y[0] == doctest::Approx(0.5).epsilon(1e-12));

  s = solve_inclusion(a, n, single(ScalarLaw::absolute(1.0)), 0.0, scalar(1.0), scalar(3.0));
  CHECK(std::abs(s.y[0]) <= 1e-10);
  CHECK(s.eta[0] == doctest::Approx(1.0));
  CHECK(s.residual <= 1e-10);

  s = solve_inclusion(a, n, single(ScalarLaw::quadratic(-0.5)), 0.0, scalar(1.0), scalar(0.0));
  CHECK(std::abs(s.y[0] - 2.0 / 3.0) <= 1e-10);
}

TEST_CASE("solve_inclusion refuses when m_A <= c_J ‖N‖²") {
  const auto a = MonotoneOperator::scaled_identity(1, 0.4);
  CHECK_THROWS_AS(solve_inclusion(a, TraceMap::identity(1), single(ScalarLaw::quadratic(-0.5)), 0.0,
                                  scalar(1.0), scalar(0.0)),
                  ConstantViolation);
}

TEST_CASE("forward path handles a trace map with N Nᵀ ≠ I") {
  Mat nm(1, 2);
  nm << 1.0, 2.0;
  const TraceMap n(nm);
  Mat am(2, 2);
  am << 12.0, 1.0, 1.0, 10.0;
  const auto a = MonotoneOperator::linear_spd(am);
  const auto j = single(ScalarLaw::quadratic(-0.5));
  InclusionSolver solver(a, n, j);
  CHECK_FALSE(solver.uses_resolvent());
  const Vec g{{1.0, -2.0}};
  const auto s = solver.solve(0.0, g, Vec::Zero(2));
  // J smooth here: (A - 0.5 NᵀN) y = g.
  const Vec exact = (am - 0.5 * nm.transpose() * nm).ldlt().solve(g);
  CHECK((s.y - exact).norm() <= 1e-8);
}

TEST_CASE("uniqueness: random starts converge to the same point") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Mat am(2, 2);
  am << 3.0, 1.0, 1.0, 2.0;
  const auto a = MonotoneOperator::linear_spd(am);
  const auto n = TraceMap::identity(2);
  const auto j = NonsmoothFunctional::separable(
      2, {LawTerm{0, ScalarLaw::friction_weakening(0.5, 0.05, 1.0, 0.5)},
          LawTerm{1, ScalarLaw::absolute(0.2)}});
  const InclusionOptions opt;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec rhs{{2.0 * g(rng), 2.0 * g(rng)}};
    const auto s1 = solve_inclusion(a, n, j, 0.0, rhs, Vec{{5 * g(rng), 5 * g(rng)}});
    const auto s2 = solve_inclusion(a, n, j, 0.0, rhs, Vec{{5 * g(rng), 5 * g(rng)}});
    CHECK((s1.y - s2.y).norm() <= 10 * opt.tol);
    // Returned η respects the growth bound pushed through Nᵀ.
    CHECK(s1.eta.norm() <= n.norm() * j.growth * ((n.matrix() * s1.y).norm() + 1) + 1e-12);
    CHECK(inclusion_residual(a, n, j, 0.0, rhs, s1.y) <= opt.tol);
  }
}

TEST_CASE("iteration steps shrink monotonically on the presets") {
  std::vector<double> steps;
  InclusionOptions opt;
  opt.step_trace = &steps;
  const auto a = MonotoneOperator::scaled_identity(1, 2.0);
  for (const auto& law : {ScalarLaw::quadratic(-0.5), ScalarLaw::absolute(1.0),
                          ScalarLaw::normal_compliance(1.0, 0.05, 0.1, 0.2)}) {
    steps.clear();
    solve_inclusion(a, TraceMap::identity(1), single(law), 0.0, scalar(1.7), scalar(-3.0), opt);
    REQUIRE(steps.size() >= 1);
    for (std::size_t k = 2; k < steps.size(); ++k) CHECK(steps[k] <= steps[k - 1] * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("inner Lipschitz ratio examples") {
  const auto a = MonotoneOperator::scaled_identity(1, 2.0);
  const auto n = TraceMap::identity(1);
  CHECK(inner_lipschitz_ratio(a, n, NonsmoothFunctional::zero(1), 0.0, scalar(1.0), scalar(3.0)) ==
        doctest::Approx(0.5).epsilon(1e-10));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto jq = single(ScalarLaw::quadratic(-0.5));
  for (int i = 0; i < 50; ++i) {
    const double r = inner_lipschitz_ratio(a, n, jq, 0.0, scalar(u(rng)), scalar(u(rng)));
    CHECK(r <= 1.0 / 1.5 + 1e-6);
  }
  for (int i = 0; i < 20; ++i) {
    const Mat m = random_spd(5, rng);
    const auto op = MonotoneOperator::linear_spd(m);
    Vec g1(5), g2(5);
    for (int k = 0; k < 5; ++k) {
      g1[k] = u(rng);
      g2[k] = u(rng);
    }
    const double r = inner_lipschitz_ratio(op, TraceMap::identity(5), NonsmoothFunctional::zero(5),
                                           0.0, g1, g2);
    CHECK(r <= 1.0 / op.strong_monotonicity + 1e-8);
  }
}

TEST_CASE("clarke directional derivative") {
  const auto abs1 = single(ScalarLaw::absolute(1.0));
  CHECK(clarke_directional(abs1, 0.0, scalar(0.0), scalar(1.0)) == 1.0);
  CHECK(clarke_directional(abs1, 0.0, scalar(0.0), scalar(-2.0)) == 2.0);
  CHECK_THROWS_AS(clarke_directional(abs1, 0.0, scalar(0.0), scalar(0.0)), DomainError);

  // Functionals without a closed form go through difference quotients.
  NonsmoothFunctional half_sq;
  half_sq.dim = 2;
  half_sq.value = [](double, ConstVecRef x) { return 0.5 * x.squaredNorm(); };
  const Vec x{{0.3, -1.2}};
  const Vec d{{0.7, 0.4}};
  CHECK(clarke_directional(half_sq, 0.0, x, d) == doctest::Approx(x.dot(d)).epsilon(1e-5));

  // Sawtooth at a kink: the larger one-sided slope, times |d|.
  const auto st = ScalarLaw::sawtooth(1.0, 0.25, 4);
  NonsmoothFunctional raw;
  raw.dim = 1;
  raw.value = [st](double, ConstVecRef x) { return st.value(x[0]); };
  const double kink = 0.25;
  const double expect = std::max(st.left_derivative(kink), st.right_derivative(kink));
  CHECK(clarke_directional(raw, 0.0, scalar(kink), scalar(1.0)) ==
        doctest::Approx(expect).epsilon(1e-4));
  CHECK(clarke_directional(single(st), 0.0, scalar(kink), scalar(2.0)) ==
        doctest::Approx(2.0 * expect).epsilon(1e-12));

  // Numerical envelope agrees with the closed form on the smooth and kink points of presets.
  const auto fr = single(ScalarLaw::friction_weakening(0.5, 0.05, 1.0, 0.5));
  NonsmoothFunctional fr_raw = fr;
  fr_raw.directional = nullptr;
  for (double p : {-0.05, 0.0, 0.02, 0.05, 0.55, 1.0}) {
    for (double dir : {1.0, -1.0}) {
      CAPTURE(p);
      CAPTURE(dir);
      CHECK(clarke_directional(fr_raw, 0.0, scalar(p), scalar(dir)) ==
            doctest::Approx(clarke_directional(fr, 0.0, scalar(p), scalar(dir))).epsilon(1e-4));
    }
  }
}
