#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "isslab/scenarios.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace isslab;

namespace {
bool has(const std::vector<double>& v, double x) {
  return std::any_of(v.begin(), v.end(), [&](double y) { return std::abs(x - y) < 1e-15; });
}
std::vector<std::string> ids(const std::vector<ClaimInfo>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.id);
  return out;
}
}  // namespace

TEST_CASE("catalog systems") {
  CHECK(catalog_ids().size() == 5);
  for (const auto& id : catalog_ids()) {
    const ScenarioSpec s = scenario_by_id(id);
    CHECK(s.id == id);
    CHECK(s.claims == ids(claims_for(s)));
    CHECK_FALSE(s.claims.empty());
  }
  const System toy = build_scalar_toy();
  CHECK(toy.modes() == 1);
  CHECK(toy.gen.eigenvalue(0) == 1.0);
  CHECK(toy.control.coefficients()(0) == 1.0);

  const System mn = build_diagonal_minus_n(20);
  CHECK(mn.control.kind() == ControlKind::DiagonalMultiplier);
  CHECK(mn.alpha() == 1.0);
  for (Index n = 0; n < 20; ++n) {
    CHECK(mn.gen.eigenvalue(n) == double(n + 1));
    CHECK(mn.control.coefficients()(n) == -double(n + 1));
  }
  CHECK_THROWS_AS(build_diagonal_minus_n(8), std::invalid_argument);
  CHECK_THROWS_AS(scenario_by_id("scalar_toy", 4), std::invalid_argument);
  CHECK_THROWS_AS(scenario_by_id("nope"), std::invalid_argument);

  const System bd = build_diagonal_bounded(16);
  for (Index n = 0; n < 16; ++n) CHECK(bd.control.coefficients()(n) == doctest::Approx(1.0 / double(n + 1)));
  CHECK(bd.stable());
  CHECK_FALSE(build_diagonal_bounded(16, 1.5).stable());
}

TEST_CASE("heat steady-state coefficients") {
  for (double a : {1.0, 0.3}) {
    const System h = build_heat_dirichlet(a, 64);
    CHECK(h.alpha() == 0.8);
    for (Index n = 1; n <= 64; ++n) {
      const double mu = a * std::numbers::pi * std::numbers::pi * double(n * n);
      CHECK(h.gen.eigenvalue(n - 1) == doctest::Approx(mu).epsilon(1e-14));
      const double expect = std::numbers::sqrt2 * (n % 2 ? 1.0 : -1.0) / (double(n) * std::numbers::pi);
      CHECK(std::abs(h.control.coefficients()(n - 1) / h.gen.eigenvalue(n - 1) - expect) <= 1e-12);
    }
  }
  CHECK_THROWS(build_heat_dirichlet(-1.0, 8));
}

TEST_CASE("counterexample inputs") {
  const ScenarioSpec toy = scenario_by_id("scalar_toy");
  const AnalyticSignal u = counterexample_input(toy, CounterexampleKind::PowerDecay, 2.0);
  REQUIRE(std::holds_alternative<PowerDecay>(u.family));
  CHECK(std::get<PowerDecay>(u.family).theta == 0.75);
  // int_0^inf (1+t)^{-3/2} dt = 2.
  CHECK(lp_norm(u, 2.0, kInf) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(std::isinf(lp_norm(u, 1.0, kInf)));
  CHECK(std::get<PowerDecay>(counterexample_input(toy, CounterexampleKind::PowerDecay, 4.0).family).theta ==
        doctest::Approx(0.625));

  const ScenarioSpec mn = scenario_from_json({{"kind", "diagonal_minus_n"}, {"modes", 16}});
  const AnalyticSignal ind = counterexample_input(mn, CounterexampleKind::IntervalIndicator);
  CHECK(ind.dim() == 16);
  CHECK(ind.horizon == 1.0);
  CHECK_THROWS_AS(counterexample_input(toy, CounterexampleKind::IntervalIndicator), std::invalid_argument);
  CHECK_THROWS_AS(counterexample_input(mn, CounterexampleKind::PowerDecay), std::invalid_argument);

  // Four-mode indicator: pieces at 1/(2n) and 1/n, ||u||_2^2 = sum 1/(2n).
  const AnalyticSignal four{IntervalIndicatorPerMode{4}, 1.0};
  const GridSignal g = discretize(four, 0.5, 1.0);
  for (double b : {0.0, 1.0 / 8, 1.0 / 6, 1.0 / 4, 1.0 / 3, 1.0 / 2, 1.0}) CHECK(has(g.breakpoints, b));
  const double energy = 0.5 * (1.0 + 0.5 + 1.0 / 3 + 0.25);
  CHECK(lp_norm(g, 2.0, 1.0) == doctest::Approx(std::sqrt(energy)).epsilon(1e-14));
  CHECK(lp_norm(four, 2.0, 1.0) == doctest::Approx(std::sqrt(energy)).epsilon(1e-14));
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& id : catalog_ids()) {
    const ScenarioSpec s = scenario_by_id(id, id == "scalar_toy" ? 0 : 24);
    const ScenarioSpec r = scenario_from_json(scenario_to_json(s));
    CHECK(r.kind == s.kind);
    CHECK(r.system.modes() == s.system.modes());
    CHECK((r.system.gen.eigenvalues() - s.system.gen.eigenvalues()).norm() == 0.0);
    CHECK(r.system.gen.shift() == s.system.gen.shift());
    CHECK((r.system.control.coefficients() - s.system.control.coefficients()).norm() == 0.0);
    CHECK(r.system.alpha() == s.system.alpha());
    CHECK(r.claims == s.claims);
    CHECK(scenario_to_json(r) == scenario_to_json(s));
  }
}

TEST_CASE("custom scenarios from JSON") {
  const nlohmann::json j = {
      {"id", "mine"},
      {"generator", {{"eigenvalues", {1.0, 2.0, 5.0}}}},
      {"control", {{"kind", "rank_one"}, {"coefficients", {1.0, -0.5, 0.25}}}},
      {"claims", {"L2-L2-ISS"}}};
  const ScenarioSpec s = scenario_from_json(j);
  CHECK(s.id == "mine");
  CHECK(s.kind == "diagonal_custom");
  CHECK(s.claims == std::vector<std::string>{"L2-L2-ISS"});
  CHECK(s.system.gen.eigenvalue(2) == 5.0);

  nlohmann::json bad = j;
  bad["claims"] = {"not-Lp-Linf"};
  CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
  bad = j;
  bad["control"]["coefficients"] = {1.0};
  CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
  bad = j;
  bad["kind"] = "wave";
  CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::array()), std::invalid_argument);

  nlohmann::json unstable = j;
  unstable["generator"]["shift"] = 1.5;
  unstable.erase("claims");
  const auto uc = ids(claims_for(scenario_from_json(unstable)));
  CHECK(std::find(uc.begin(), uc.end(), "not-ISS") != uc.end());
  CHECK(std::find(uc.begin(), uc.end(), "L2-L2-ISS") == uc.end());
}

TEST_CASE("cheap claims reproduce") {
  const ReproduceConfig cfg{0, 20};
  const ClaimReport a = reproduce(scenario_by_id("heat_dirichlet"), "steady-state", cfg);
  CHECK(a.passed);
  CHECK(a.expected == "holds");
  CHECK_FALSE(a.tables.empty());
  const ClaimReport b = reproduce(scenario_by_id("diagonal_shifted_unstable"), "not-ISS", cfg);
  CHECK(b.passed);
  CHECK(b.observed == "not-ISS");
  const ClaimReport c = reproduce(scenario_by_id("diagonal_minus_n", 16), "indicator-lower-bound", cfg);
  CHECK(c.passed);
  CHECK_THROWS_AS(reproduce(scenario_by_id("scalar_toy"), "bogus", cfg), std::invalid_argument);
}

TEST_CASE("reproduce is deterministic") {
  const ReproduceConfig cfg{7, 20};
  const ScenarioSpec s = scenario_by_id("diagonal_bounded", 16);
  for (const auto& claim : s.claims) {
    const ClaimReport x = reproduce(s, claim, cfg), y = reproduce(s, claim, cfg);
    CHECK(x.passed == y.passed);
    CHECK(x.summary.dump() == y.summary.dump());
    REQUIRE(x.tables.size() == y.tables.size());
    for (std::size_t k = 0; k < x.tables.size(); ++k) CHECK(x.tables[k].rows == y.tables[k].rows);
  }
}
