#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "isslab/lyapunov.hpp"
#include "isslab/scenarios.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace isslab;

namespace {
VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
System scalar_toy() { return System(Generator(vec({1.0})), Control::rank_one(vec({1.0}))); }
VectorXd random_state(UniformStream& rng, Index n) {
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = rng.normal() / double(i + 1);
  return x;
}
}  // namespace

TEST_CASE("v_sup of a diagonal contraction is the norm") {
  // Every term x_n^2 e^{2(lambda - r_n)t} decreases, so the sup sits at t = 0.
  const Generator g = Generator::linear(12, 1.0);
  UniformStream rng(4);
  for (int i = 0; i < 10; ++i) {
    const VectorXd x = random_state(rng, 12);
    CHECK(v_sup(g, 0.5, x) == doctest::Approx(x.norm()).epsilon(1e-12));
  }
  CHECK(v_sup(g, 0.5, VectorXd::Zero(12)) == 0.0);
  CHECK_THROWS_AS(v_sup(g, 1.0, VectorXd::Ones(12)), std::domain_error);
  CHECK_THROWS_AS(v_sup(g, 0.0, VectorXd::Ones(12)), std::domain_error);
  CHECK_THROWS_AS(v_sup(g, 0.5, VectorXd::Ones(3)), std::invalid_argument);
}

TEST_CASE("v_diag partial sums") {
  const Index N = 2000;
  const Generator g = Generator::linear(N, 1.0);
  VectorXd x(N);
  long double s = 0.0L;
  for (Index n = N; n >= 1; --n) {
    x(n - 1) = 1.0 / double(n);
    s += 1.0L / (static_cast<long double>(n) * n * n);
  }
  CHECK(v_diag(g, x).value == doctest::Approx(double(s)).epsilon(1e-14));
  // zeta(3) minus the integral tail 1/(2N^2).
  CHECK(v_diag(g, x).value == doctest::Approx(1.2020569031595942 - 0.5 / (double(N) * N)).epsilon(1e-9));
}

TEST_CASE("v_heat routes") {
  const double a = 0.7;
  const Generator g = Generator::quadratic(16, a * std::numbers::pi * std::numbers::pi);
  CHECK(v_heat(g, VectorXd::Unit(16, 0), HeatRoute::Spectral) ==
        doctest::Approx(1.0 / (a * std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
  CHECK(v_heat(g, VectorXd::Unit(16, 0), HeatRoute::Kernel) ==
        doctest::Approx(1.0 / (a * std::numbers::pi * std::numbers::pi)).epsilon(1e-9));
  UniformStream rng(9);
  for (int i = 0; i < 5; ++i) {
    const VectorXd x = random_state(rng, 16);
    const double s = v_heat(g, x, HeatRoute::Spectral), k = v_heat(g, x, HeatRoute::Kernel);
    CHECK(std::abs(s - k) <= 1e-6 * s);
  }
  // Independent double integral of the Green's function min(x,y)(1-max(x,y))/a.
  const VectorXd x = vec({0.4, -0.3, 0.2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.1});
  const auto prof = [&](double xi) {
    double v = 0;
    for (Index n = 0; n < 16; ++n) v += x(n) * std::numbers::sqrt2 * std::sin(double(n + 1) * std::numbers::pi * xi);
    return v;
  };
  const double dbl = oracle::simpson(
      [&](double s) {
        return prof(s) * (oracle::simpson([&](double t) { return t * (1 - s) * prof(t); }, 0, s, 400) +
                          oracle::simpson([&](double t) { return s * (1 - t) * prof(t); }, s, 1, 400)) / a;
      },
      0, 1, 400);
  CHECK(v_heat(g, x, HeatRoute::Kernel) == doctest::Approx(dbl).epsilon(1e-6));
  CHECK_THROWS_AS(v_heat(Generator::linear(16, 1.0), x, HeatRoute::Spectral), std::invalid_argument);
}

TEST_CASE("v_integral_n closed forms") {
  const Generator g = Generator::linear(32, 1.0, 0.0, 0.5);
  UniformStream rng(1);
  for (int i = 0; i < 20; ++i) {
    const VectorXd x = random_state(rng, 32);
    const double closed = (x.cwiseAbs2().array() / (2.0 * g.rates().array())).sum();
    CHECK(v_integral_n(g, 2, x) == doctest::Approx(closed).epsilon(1e-8));
  }
  // One mode: int |x|^n e^{-n r t} dt = |x|^n / (n r).
  const Generator one(vec({2.0}));
  CHECK(v_integral_n(one, 1, vec({-3.0})) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(v_integral_n(one, 3, vec({0.5})) == doctest::Approx(0.125 / 6.0).epsilon(1e-10));
  // n = 4 against Simpson.
  const Generator two(vec({1.0, 3.0}));
  const VectorXd x = vec({1.0, 2.0});
  const double simpson = oracle::simpson(
      [](double t) { return std::pow(std::exp(-2 * t) + 4 * std::exp(-6 * t), 2.0); }, 0, 40, 40000);
  CHECK(v_integral_n(two, 4, x) == doctest::Approx(simpson).epsilon(1e-9));
}

TEST_CASE("integral construction rejects n alpha >= 1 and unstable systems") {
  const System heat = build_heat_dirichlet(1.0, 16);
  CHECK_THROWS_AS(make_v_integral_n(heat, 2), std::domain_error);
  CHECK_NOTHROW(make_v_integral_n(heat, 1));
  const System unstable = build_diagonal_bounded(16, 1.5);
  CHECK_THROWS_AS(make_v_integral_n(unstable, 2), std::domain_error);
}

TEST_CASE("Dini derivatives of simple candidates") {
  const System toy = scalar_toy();
  // V = |x| along x' = -x: dV/dt = -1 at x = 1.
  const LyapunovFunction vs = make_v_sup(toy, 0.5);
  CHECK(dini_lie_derivative(vs, toy, vec({1.0}), GridSignal::scalar_constant(0.0, 1.0)).value ==
        doctest::Approx(-1.0).epsilon(1e-4));
  // V = x^2 at the equilibrium x = u = 1: zero.
  const LyapunovFunction vd = make_v_diag(toy);
  CHECK(std::abs(dini_lie_derivative(vd, toy, vec({1.0}), GridSignal::scalar_constant(1.0, 1.0)).value) < 1e-12);
  const DiniResult r = dini_lie_derivative(vd, toy, vec({2.0}), GridSignal::scalar_constant(0.0, 1.0));
  CHECK(r.steps.size() == 17);
  CHECK(r.value == doctest::Approx(-8.0).epsilon(1e-4));
  DiniSchedule bad;
  bad.j_max = -1;
  CHECK_THROWS_AS(dini_lie_derivative(vd, toy, vec({1.0}), GridSignal::scalar_constant(0.0, 1.0), bad),
                  std::invalid_argument);
}

TEST_CASE("Dini quotient matches closed-form Lie derivatives") {
  const System sys = build_diagonal_bounded(32);
  const LyapunovFunction vd = make_v_diag(sys);
  const LyapunovFunction vi = make_v_integral_n(sys, 2);
  UniformStream rng(5);
  for (int i = 0; i < 30; ++i) {
    const VectorXd x = random_state(rng, 32);
    const VectorXd u0 = VectorXd::Constant(1, rng.uniform(-2.0, 2.0));
    const GridSignal u = GridSignal::constant(u0, 1e-3);
    CHECK(std::abs(dini_lie_derivative(vd, sys, x, u).value - lie_derivative_v_diag(sys, x, u0)) < 1e-4);
    CHECK(std::abs(dini_lie_derivative(vi, sys, x, u).value - lie_derivative_v_integral2(sys, x, u0)) < 1e-4);
  }
}

TEST_CASE("dissipation on the scalar toy") {
  // V = x^2, dV/dt = -2x^2 + 2xu <= -a3 x^2 + a4 u^2 iff a4 (2 - a3) >= 1.
  const System toy = scalar_toy();
  const LyapunovCertificate c = check_dissipation(make_v_diag(toy), toy, 2.0, 8, 0);
  REQUIRE(c.success);
  CHECK(c.a3 == 1.0);
  CHECK(c.a4 == 1.0);
  CHECK(c.a4 * (2.0 - c.a3) >= 1.0);
  CHECK(c.samples == 8 * 45);
  CHECK(c.max_derivative_at_zero_input == doctest::Approx(-2.0));
}

TEST_CASE("dissipation on bounded and unstable catalog systems") {
  const System ok = build_diagonal_bounded(64);
  const LyapunovCertificate c = check_dissipation(make_v_diag(ok), ok, 2.0, 40, 0);
  CHECK(c.success);
  CHECK(c.a3 >= 1.0);
  const System bad = build_diagonal_bounded(64, 1.5);
  const LyapunovCertificate f = check_dissipation(make_v_diag(bad), bad, 2.0, 40, 0);
  CHECK_FALSE(f.success);
  CHECK(f.max_derivative_at_zero_input > 0.0);
  CHECK_FALSE(f.message.empty());
  CHECK_THROWS_AS(check_dissipation(make_v_diag(ok), ok, kInf, 4, 0), std::invalid_argument);
}

TEST_CASE("Dini path agrees with the closed-form path") {
  const System sys = build_diagonal_bounded(16);
  LyapunovFunction plain = make_v_diag(sys);
  LyapunovFunction dini = plain;
  dini.lie = nullptr;
  const LyapunovCertificate a = check_dissipation(plain, sys, 2.0, 12, 2);
  const LyapunovCertificate b = check_dissipation(dini, sys, 2.0, 12, 2);
  CHECK(a.success == b.success);
  // The first mode sits exactly on the a4 = 1 boundary, so the O(h) Dini
  // overshoot may move a4 up by one grid step but no further.
  CHECK(a.a3 == b.a3);
  CHECK(b.a4 >= a.a4);
  CHECK(b.a4 <= 2.0 * a.a4);
}

TEST_CASE("homogeneity of every construction") {
  const System sys = build_diagonal_bounded(16);
  for (const auto& V : {make_v_sup(sys, 0.5), make_v_diag(sys), make_v_integral_n(sys, 2), make_v_integral_n(sys, 3)}) {
    const HomogeneityCheck h = check_homogeneity(V, V.degree, 10, 3, 16);
    CHECK(h.passed);
    CHECK(h.tolerance == (V.quadrature ? 1e-8 : 1e-12));
  }
  const System heat = build_heat_dirichlet(1.0, 16);
  CHECK(check_homogeneity(make_v_heat(heat), 2.0, 10, 3, 16).passed);
  CHECK(check_homogeneity(make_v_heat(heat, HeatRoute::Kernel), 2.0, 4, 3, 16).passed);
  // Wrong degree is caught.
  CHECK_FALSE(check_homogeneity(make_v_diag(sys), 1.0, 4, 3, 16).passed);
}

TEST_CASE("coercivity constants bracket the value") {
  const System sys = build_diagonal_bounded(16);
  UniformStream rng(8);
  for (const auto& V : {make_v_sup(sys, 0.5), make_v_diag(sys), make_v_integral_n(sys, 2)}) {
    for (int i = 0; i < 10; ++i) {
      const VectorXd x = random_state(rng, 16);
      const double nq = std::pow(x.norm(), V.degree);
      CHECK(V.value(x) <= V.c_hi * nq * (1 + 1e-8));
      CHECK(V.value(x) >= V.c_lo * nq * (1 - 1e-8));
    }
  }
}

TEST_CASE("smoothing bounds behind the Lyapunov construction") {
  const System toy = scalar_toy();
  const LemmaBoundsReport r = lemma_bounds_check(toy, vec({1.0}), {1e-1, 1e-2, 1e-3}, {0.5, 1, 2});
  CHECK(r.omega == 1.0);
  CHECK(r.C_operator == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.C_empirical == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.smoothing_holds);
  CHECK(r.limit_holds);
  CHECK(r.limit_order == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r.limit_converges);

  const System heat = build_heat_dirichlet(1.0, 32);
  const LemmaBoundsReport h = lemma_bounds_check(heat, vec({1.0}), {1e-2, 1e-3, 1e-4, 1e-5}, {0.01, 0.1, 1});
  CHECK(h.omega == doctest::Approx(0.5 * std::numbers::pi * std::numbers::pi));
  CHECK(h.smoothing_holds);
  CHECK(h.limit_holds);
  CHECK(h.limit_converges);
  CHECK(h.limit_errors.back() < 0.05 * h.limit_errors.front());
  CHECK_THROWS_AS(lemma_bounds_check(build_diagonal_minus_n(16), VectorXd::Ones(16), {1e-2, 1e-3}, {1}),
                  std::invalid_argument);
}
