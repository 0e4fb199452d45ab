#pragma once

// Catalog of reference systems, their counterexample inputs, and the claims
// each one is expected to reproduce.

#include "isslab/signals.hpp"
#include "isslab/system.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace isslab {

struct ScenarioSpec {
  std::string id;    // catalog name or the "id" field of a JSON file
  std::string kind;  // scalar_toy | diagonal_minus_n | diagonal_custom | heat_dirichlet
  System system;
  double diffusion{0};  // heat_dirichlet only
  std::vector<std::string> claims;
};

/// lambda = 1, b = 1.
System build_scalar_toy();
/// lambda_n = n, B = A_{-1} as the multiplier b_n = -n (alpha = 1). N >= 16.
System build_diagonal_minus_n(Index modes);
/// mu_n = a pi^2 n^2, b_n = a sqrt(2) n pi (-1)^{n+1}, declared alpha = 0.8.
System build_heat_dirichlet(double diffusion, Index modes);
/// lambda_n = n with the bounded rank-one test input b_n = 1/n, optionally
/// shifted by `shift` (shift > 1 makes it unstable).
System build_diagonal_bounded(Index modes, double shift = 0.0);

inline constexpr Index kDefaultModes = 64;

/// Catalog entries: scalar_toy, diagonal_minus_n, heat_dirichlet,
/// diagonal_bounded, diagonal_shifted_unstable.
std::vector<std::string> catalog_ids();
/// modes = 0 keeps the catalog default.
ScenarioSpec scenario_by_id(const std::string& id, Index modes = 0);
/// Builds a scenario from its JSON description (see docs/schemas/scenario.schema.json).
ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& s);

enum class CounterexampleKind { PowerDecay, IntervalIndicator };
/// PowerDecay(theta = (1 + 1/p)/2) for the scalar toy, the per-mode indicator
/// for diagonal_minus_n.
AnalyticSignal counterexample_input(const ScenarioSpec& s, CounterexampleKind kind, double p = 2.0);

struct ClaimInfo {
  std::string id;
  std::string statement;
  std::string expected;
};
/// Registered claims of a scenario, in reproduction order.
std::vector<ClaimInfo> claims_for(const ScenarioSpec& s);

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ReproduceConfig {
  std::uint64_t seed{0};
  int probes{100};
};

struct ClaimReport {
  std::string scenario;
  std::string claim;
  std::string expected;
  std::string observed;
  bool passed{false};
  nlohmann::json summary;
  std::vector<CsvTable> tables;
};

/// Runs one claim. Throws std::invalid_argument for an unknown claim id.
ClaimReport reproduce(const ScenarioSpec& s, const std::string& claim, const ReproduceConfig& cfg = {});

}  // namespace isslab
