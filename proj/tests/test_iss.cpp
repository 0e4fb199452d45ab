#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "isslab/iss.hpp"
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
IssOptions quick() {
  IssOptions o;
  o.probes.count = 24;
  o.state_probes = 8;
  o.combined_probes = 8;
  return o;
}
const std::vector<double> kLadder{1, 2, 4, 8, 16};
}  // namespace

TEST_CASE("stability check on the scalar toy") {
  const Generator g(vec({1.0}));
  const StabilityCheck s = exponential_stability_check(g, 2.0, 16.0);
  CHECK(s.omega_fit == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.datko_integral == doctest::Approx(0.5 * (1 - std::exp(-32.0))).epsilon(1e-14));
  CHECK(s.tail_bound == doctest::Approx(std::exp(-32.0) / 2).epsilon(1e-12));
  CHECK(s.stable);
  CHECK(s.growth == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Datko integral for q = 3 against Simpson") {
  const Generator g = Generator::linear(6, 1.0, 0.0, 0.25);
  const VectorXd x = vec({0.3, -1.0, 0.5, 0.2, -0.7, 0.1});
  const double H = 12.0;
  const double simpson = oracle::simpson(
      [&](double t) {
        double s = 0;
        for (Index n = 0; n < 6; ++n) s += x(n) * x(n) * std::exp(-2.0 * (double(n + 1) - 0.25) * t);
        return std::pow(s, 1.5);
      },
      0.0, H, 20000);
  const StabilityCheck s = exponential_stability_check(g, 3.0, H, x);
  CHECK(s.datko_integral == doctest::Approx(simpson).epsilon(1e-9));
  CHECK(s.omega_fit == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(s.stable);
}

TEST_CASE("unstable generator fails the Datko check") {
  const Generator g = Generator::linear(8, 1.0, 0.0, 1.5);
  const StabilityCheck s = exponential_stability_check(g, 2.0, 16.0);
  CHECK_FALSE(s.stable);
  CHECK(s.omega_fit == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(std::isinf(s.tail_bound));
  CHECK(s.growth > 100.0);
  CHECK_THROWS_AS(exponential_stability_check(g, kInf, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exponential_stability_check(g, 2.0, 1.0, vec({1.0})), std::invalid_argument);
}

TEST_CASE("ISS gains of the scalar toy") {
  const System toy = scalar_toy();
  const IssGainReport r = iss_gain_fit(toy, 2, 2, kLadder, 0, quick());
  CHECK(r.verdict == IssVerdict::Consistent);
  // ||e^{-t}||_{L^2(0,16)} and the L^2 gain sup |1/(1+iw)| = 1.
  CHECK(r.M == doctest::Approx(std::sqrt(0.5 * (1 - std::exp(-32.0)))).epsilon(1e-8));
  CHECK(r.G == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.G <= 1.0 + 1e-9);
  for (std::size_t k = 1; k < r.M_estimates.size(); ++k) CHECK(r.M_estimates[k] >= r.M_estimates[k - 1]);

  const IssGainReport inf = iss_gain_fit(toy, kInf, kInf, kLadder, 0, quick());
  CHECK(inf.M == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inf.G <= 1.0 + 1e-9);
  CHECK(inf.G > 0.5);
  CHECK(inf.verdict == IssVerdict::Consistent);
}

TEST_CASE("fitted gains bound an independent RK4 trajectory") {
  const System toy = scalar_toy();
  const IssGainReport r = iss_gain_fit(toy, 2, 2, kLadder, 3, quick());
  const double H = 16.0;
  for (double x0 : {-2.0, 0.0, 0.5, 3.0}) {
    for (double level : {-1.0, 0.25, 2.0}) {
      // ||x||_{L^2(0,H)} by Simpson on RK4 values at the Simpson nodes.
      const int n = 4000;
      const double h = H / n;
      double s = 0, x = x0;
      for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * x * x;
        x = oracle::rk4_scalar(1.0, level, x, h, 4);
      }
      const double state = std::sqrt(s * h / 3.0);
      const double input = std::abs(level) * std::sqrt(H);
      CHECK(state <= r.M * std::abs(x0) + r.G * input + 1e-6);
    }
  }
}

TEST_CASE("unstable systems are not ISS") {
  const System sys = System::unchecked(Generator::linear(8, 1.0, 0.0, 1.5), Control::rank_one(VectorXd::Ones(8)));
  const IssGainReport r = iss_gain_fit(sys, 2, 2, kLadder, 0, quick());
  CHECK(r.verdict == IssVerdict::NotIss);
  REQUIRE(r.datko.has_value());
  CHECK_FALSE(r.datko->stable);
  CHECK(iss_verdict_name(r.verdict) == "not-ISS");
}

TEST_CASE("horizon ladder validation") {
  const System toy = scalar_toy();
  CHECK_THROWS_AS(iss_gain_fit(toy, 2, 2, {1.0}, 0, quick()), std::invalid_argument);
  CHECK_THROWS_AS(iss_gain_fit(toy, 2, 2, {2.0, 1.0}, 0, quick()), std::invalid_argument);
  CHECK_THROWS_AS(iss_gain_fit(toy, 2, 2, {0.0, 1.0}, 0, quick()), std::invalid_argument);
}

TEST_CASE("pointwise bridge for bounded and unbounded control") {
  const System toy = scalar_toy();
  const IssGainReport r = p_infty_bridge(toy, 2.0, {1, 4, 16}, 0, quick());
  CHECK(r.verdict == IssVerdict::Consistent);
  CHECK(r.worst_violation <= 0.0);
  CHECK(r.M == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.decay_rate == 1.0);
  // Cauchy-Schwarz: |int e^{-(t-s)} u| <= ||e^{-s}||_{L^2} ||u||_{L^2} < 1/sqrt 2.
  CHECK(r.G <= std::sqrt(0.5) + 1e-9);
  CHECK(r.G > 0.3);

  // B in X_{-1/2}-ish: the heat-like profile needs p > 1/(1-alpha).
  const Generator g = Generator::quadratic(16, 1.0);
  VectorXd b(16);
  for (Index n = 0; n < 16; ++n) b(n) = double(n + 1);
  const System rough(g, Control::rank_one(b, 0.8));
  CHECK_THROWS_AS(p_infty_bridge(rough, 2.0, {1, 2}, 0, quick()), std::domain_error);
  const IssGainReport ok = p_infty_bridge(rough, 8.0, {1, 2}, 0, quick());
  CHECK(ok.worst_violation <= 1e-12 * std::max(1.0, ok.M));
}

TEST_CASE("results do not depend on the seed beyond probe choice") {
  const System toy = scalar_toy();
  const IssGainReport a = iss_gain_fit(toy, 2, 2, kLadder, 11, quick());
  const IssGainReport b = iss_gain_fit(toy, 2, 2, kLadder, 11, quick());
  CHECK(a.M == b.M);
  CHECK(a.G == b.G);
  CHECK(a.worst_ratio == b.worst_ratio);
}
