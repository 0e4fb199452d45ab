#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "isslab/mild_solution.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace isslab;

namespace {
VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

System scalar_toy() { return System(Generator(vec({1.0})), Control::rank_one(vec({1.0}))); }

System random_bounded(std::uint64_t seed, Index modes) {
  UniformStream rng(seed);
  VectorXd b(modes);
  for (Index i = 0; i < modes; ++i) b(i) = (rng.next() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.0) / double(i + 1);
  return System(Generator::linear(modes, 1.0, 0.5), Control::rank_one(b));
}

GridSignal random_signal(UniformStream& rng, Index dim, int pieces, double horizon) {
  std::vector<double> bp{0.0};
  for (int k = 1; k < pieces; ++k) bp.push_back(horizon * k / pieces + rng.uniform(-0.3, 0.3) * horizon / pieces);
  bp.push_back(horizon);
  MatrixXd v(pieces, dim);
  for (int k = 0; k < pieces; ++k)
    for (Index j = 0; j < dim; ++j) v(k, j) = rng.uniform(-1, 1);
  return GridSignal(bp, v);
}

double rel(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }
}  // namespace

TEST_CASE("step closed forms") {
  const System toy = scalar_toy();
  CHECK(step(toy, vec({0.0}), vec({1.0}), 2.0)(0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(step(toy, vec({3.0}), vec({0.0}), 1.5)(0) == doctest::Approx(3.0 * std::exp(-1.5)).epsilon(1e-15));

  const System two(Generator(vec({1.0, 2.0})), Control::rank_one(vec({1.0, 1.0})));
  const VectorXd steady = step(two, vec({0.0, 0.0}), vec({1.0}), 100.0);
  CHECK(steady(0) == doctest::Approx(1.0));
  CHECK(steady(1) == doctest::Approx(0.5));

  // Independent RK4 on the scalar ODE.
  CHECK(step(toy, vec({0.3}), vec({-0.7}), 1.3)(0) ==
        doctest::Approx(oracle::rk4_scalar(1.0, -0.7, 0.3, 1.3, 2000)).epsilon(1e-12));

  bool series = false;
  step(toy, vec({0.0}), vec({1.0}), 1e-10, &series);
  CHECK(series);
  step(toy, vec({0.0}), vec({1.0}), 0.1, &series);
  CHECK_FALSE(series);
  CHECK(integrator_factor(1.0, 1e-10) == doctest::Approx(1e-10 - 0.5e-20).epsilon(1e-15));
  CHECK(integrator_factor(0.0, 2.0) == 2.0);
  // Unstable mode: factor (e^{|r|dt}-1)/|r|.
  CHECK(integrator_factor(-1.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));

  CHECK_THROWS_AS(step(toy, vec({0.0, 1.0}), vec({1.0}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step(toy, vec({0.0}), vec({1.0, 2.0}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step(toy, vec({0.0}), vec({1.0}), 0.0), std::invalid_argument);
}

TEST_CASE("trajectory") {
  const System toy = scalar_toy();
  // x0 = 1 with u = 1 is an equilibrium.
  const Trajectory tr = trajectory(toy, vec({1.0}), GridSignal::scalar_constant(1.0, 10.0), make_output_grid(10.0, 0.5));
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.states(0, 0) == 1.0);
  for (Index k = 0; k < tr.states.cols(); ++k) CHECK(tr.states(0, k) == doctest::Approx(1.0).epsilon(1e-14));

  // u = 0 reproduces the semigroup.
  const System sys = random_bounded(3, 16);
  const VectorXd x0 = VectorXd::LinSpaced(16, 1.0, -1.0);
  const Trajectory free = trajectory(sys, x0, GridSignal::zero(1, 4.0), make_output_grid(4.0, 0.25, 6));
  for (std::size_t k = 0; k < free.times.size(); ++k)
    CHECK(rel(free.state(k), semigroup_apply(sys.gen, free.times[k], x0)) < 1e-14);

  // Output grid is refined by the input breakpoints.
  MatrixXd v(2, 1);
  v << 1.0, -1.0;
  const GridSignal u({0.0, 0.3, 1.0}, v);
  const Trajectory with_bp = trajectory(sys, x0, u, {0.0, 0.5, 1.0});
  CHECK(std::find(with_bp.times.begin(), with_bp.times.end(), 0.3) != with_bp.times.end());
  CHECK(with_bp.times.size() == 4);

  const auto grid = make_output_grid(1.0, 0.25, 3);
  CHECK(std::find(grid.begin(), grid.end(), 0.125) != grid.end());
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("linearity, causality and composition") {
  UniformStream rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const System sys = random_bounded(100 + trial, 24);
    const GridSignal u = random_signal(rng, 1, 12, 3.0);
    const GridSignal w = random_signal(rng, 1, 12, 3.0);
    // Linearity needs a common grid: reuse u's breakpoints for the combination.
    const GridSignal w_on_u(u.breakpoints, [&] {
      MatrixXd m(u.pieces(), 1);
      for (Index k = 0; k < u.pieces(); ++k) m(k, 0) = w.value_at(u.breakpoints[k])(0);
      return m;
    }());
    const GridSignal combo(u.breakpoints, 2.0 * u.values - 0.5 * w_on_u.values);
    const VectorXd lin = 2.0 * input_map(sys, u, 3.0) - 0.5 * input_map(sys, w_on_u, 3.0);
    CHECK(rel(input_map(sys, combo, 3.0), lin) < 1e-12);

    // Causality: changing u after t = 1.7 leaves Phi_{1.7} unchanged.
    const GridSignal cut = u.truncated(1.7);
    CHECK(rel(input_map(sys, cut, 1.7), input_map(sys, u, 1.7)) < 1e-13);

    // Composition: Phi_{s+t} u = T(t) Phi_s u + Phi_t u(s + .).
    const double s = 1.1, t = 1.6;
    const VectorXd lhs = input_map(sys, u, s + t);
    const VectorXd rhs = semigroup_apply(sys.gen, t, input_map(sys, u, s)) + input_map(sys, u.shifted(s), t);
    CHECK(rel(lhs, rhs) < 1e-12);

    // Restarting from phi(s) reproduces phi(s+t).
    const VectorXd x0 = VectorXd::Constant(24, 0.1);
    const VectorXd mid = mild_solution(sys, x0, u, s);
    CHECK(rel(mild_solution(sys, mid, u.shifted(s), t), mild_solution(sys, x0, u, s + t)) < 1e-12);
  }
}

TEST_CASE("continuity in time for alpha < 1") {
  // b_n = n^{0.4} with lambda_n = n: B in X_{-alpha} for alpha = 0.95.
  const Index N = 256;
  VectorXd b(N);
  for (Index n = 1; n <= N; ++n) b(n - 1) = std::pow(double(n), 0.4);
  const System sys(Generator::linear(N, 1.0), Control::rank_one(b, 0.95));
  double previous = kInf;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    const Trajectory tr = trajectory(sys, VectorXd::Zero(N), GridSignal::scalar_constant(1.0, 1.0), make_output_grid(1.0, dt));
    double jump = 0.0;
    for (Index k = 1; k < tr.states.cols(); ++k) jump = std::max(jump, (tr.states.col(k) - tr.states.col(k - 1)).norm());
    CHECK(jump < previous);
    previous = jump;
  }
}

TEST_CASE("state norms") {
  const System toy = scalar_toy();
  // x0 = 0, u = 1: x(t) = 1 - e^{-t}.
  const GridSignal one = GridSignal::scalar_constant(1.0, 5.0);
  CHECK(state_lq_norm(toy, vec({0.0}), one, 1.0, 5.0) == doctest::Approx(5.0 - (1.0 - std::exp(-5.0))).epsilon(1e-10));
  const double l2sq = 5.0 - 2.0 * (1.0 - std::exp(-5.0)) + (1.0 - std::exp(-10.0)) / 2.0;
  CHECK(state_lq_norm(toy, vec({0.0}), one, 2.0, 5.0) == doctest::Approx(std::sqrt(l2sq)).epsilon(1e-12));
  CHECK(state_lq_norm(toy, vec({0.0}), one, kInf, 5.0) == doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-10));
  CHECK(state_lq_norm(toy, vec({2.0}), GridSignal::zero(1, 1.0), 3.0, 1.0) ==
        doctest::Approx(2.0 * std::cbrt((1.0 - std::exp(-3.0)) / 3.0)).epsilon(1e-10));

  // Gram entries against Simpson quadrature, on both branches of the series switch.
  for (double r : {0.0, 1e-6, 0.03, 0.5, 4.0, 300.0}) {
    for (double dt : {0.01, 0.7, 2.0}) {
      const auto phi = [&](double s) { return r == 0.0 ? s : -std::expm1(-r * s) / r; };
      const PieceGram g = piece_gram(r, dt);
      const int n = 20000;
      CHECK(g.xx == doctest::Approx(oracle::simpson([&](double s) { return std::exp(-2 * r * s); }, 0, dt, n)).epsilon(1e-9));
      CHECK(g.xv == doctest::Approx(oracle::simpson([&](double s) { return std::exp(-r * s) * phi(s); }, 0, dt, n)).epsilon(1e-9));
      CHECK(g.vv == doctest::Approx(oracle::simpson([&](double s) { return phi(s) * phi(s); }, 0, dt, n)).epsilon(1e-9));
    }
  }

  // Multi-mode q = 2 norm against a dense trapezoid on the sampled trajectory.
  const System sys = random_bounded(9, 8);
  UniformStream rng(2);
  const GridSignal u = random_signal(rng, 1, 6, 2.0);
  const VectorXd x0 = VectorXd::Constant(8, 0.2);
  const Trajectory tr = trajectory(sys, x0, u, make_output_grid(2.0, 1e-4));
  const VectorXd norms = tr.norms();
  double acc = 0.0;
  for (Index k = 1; k < norms.size(); ++k)
    acc += 0.5 * (tr.times[k] - tr.times[k - 1]) * (norms(k) * norms(k) + norms(k - 1) * norms(k - 1));
  CHECK(state_lq_norm(sys, x0, u, 2.0, 2.0) == doctest::Approx(std::sqrt(acc)).epsilon(1e-6));
  CHECK(state_lq_norm(sys, x0, u, kInf, 2.0) >= norms.maxCoeff() - 1e-12);
  CHECK(state_lq_norm(sys, x0, u, kInf, 2.0) <= norms.maxCoeff() * (1 + 1e-6));
}

TEST_CASE("indicator input map") {
  const double e = std::exp(1.0), sqe = std::exp(0.5);
  const auto g1 = Generator::linear(64, 1.0);
  const IndicatorInputMap one = input_map_indicator(g1, 1.0);
  const double full_bound = (e - sqe) * (e - sqe) * std::exp(-2.0) / (1.0 - std::exp(-2.0));
  CHECK(one.lower_bound_full == doctest::Approx(full_bound).epsilon(1e-14));
  CHECK(one.norm_squared >= one.lower_bound);

  // Per-mode oracle: -n * int_{[1/2n, 1/n] cap [0,tau]} e^{-n(tau-s)} ds by Simpson.
  const double tau = 0.3;
  const IndicatorInputMap m = input_map_indicator(g1, tau);
  for (int n = 1; n <= 64; ++n) {
    const double a = 0.5 / n, b = std::min(1.0 / n, tau);
    const double ref = a >= tau ? 0.0 : -n * oracle::simpson([&](double s) { return std::exp(-n * (tau - s)); }, a, b, 2000);
    CHECK(m.state(n - 1) == doctest::Approx(ref).epsilon(1e-10));
    if (1.0 / n <= tau) CHECK(m.state(n - 1) == doctest::Approx(-std::exp(-n * tau) * (e - sqe)).epsilon(1e-13));
  }

  // tau ||Phi_tau u||^2 settles as tau shrinks.
  std::vector<double> scaled;
  for (int j = 4; j <= 8; ++j) {
    const double t = std::ldexp(1.0, -j);
    const Index N = 4 * Index(std::ceil(1.0 / t));
    const IndicatorInputMap r = input_map_indicator(Generator::linear(N, 1.0), t);
    CHECK(r.norm_squared >= r.lower_bound);
    scaled.push_back(t * r.norm_squared);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK(*hi / *lo < 1.25);

  CHECK_THROWS_AS(input_map_indicator(g1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(input_map_indicator(Generator::linear(8, 2.0), 0.5), std::invalid_argument);
}

TEST_CASE("A Phi") {
  const System toy = scalar_toy();
  const Trajectory z = apply_A_phi(toy, GridSignal::zero(1, 2.0), make_output_grid(2.0, 0.5));
  CHECK(z.states.isZero());
  const Trajectory a = apply_A_phi(toy, GridSignal::scalar_constant(1.0, 3.0), make_output_grid(3.0, 0.5));
  for (std::size_t k = 0; k < a.times.size(); ++k)
    CHECK(a.states(0, Index(k)) == doctest::Approx(-(1.0 - std::exp(-a.times[k]))).epsilon(1e-14));

  const System sys = random_bounded(4, 12);
  UniformStream rng(8);
  const GridSignal u = random_signal(rng, 1, 5, 2.0);
  const Trajectory ap = apply_A_phi(sys, u, {0.0, 1.0, 2.0});
  const VectorXd back = -ap.final_state().cwiseQuotient(sys.gen.rates());
  CHECK(rel(back, input_map(sys, u, 2.0)) < 1e-14);
}
