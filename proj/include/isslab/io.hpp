#pragma once

// JSON and CSV conversion for systems, signals and reports.

#include "isslab/admissibility.hpp"
#include "isslab/iss.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/mild_solution.hpp"
#include "isslab/scenarios.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace isslab {

using nlohmann::json;

/// Shortest round-trip decimal ("%.17g" family); "inf", "-inf", "nan".
std::string format_number(double v);
/// Exponent literal: a number >= 1 or "inf".
double parse_exponent(const std::string& text);
json exponent_json(double v);

/// {"eigenvalues": [...], "shift": s} or {"rule": "linear"|"quadratic",
/// "scale": c, "offset": d, "modes": N, "shift": s}.
Generator generator_from_json(const json& j);
json to_json(const Generator& g);
/// {"kind": "rank_one"|"multiplier", "coefficients": [...], "alpha": a}.
Control control_from_json(const json& j, Index modes);
json to_json(const Control& b);

/// {"breakpoints": [...], "values": [[...], ...], "tail": [...]} or
/// {"family": "power_decay"|"indicator"|"constant", ...}.
GridSignal grid_signal_from_json(const json& j);
AnalyticSignal analytic_signal_from_json(const json& j);
json to_json(const GridSignal& u);

json to_json(const AdmissibilityReport& r);
json to_json(const FixedInputSweep& r);
json to_json(const StabilityCheck& r);
json to_json(const IssGainReport& r);
json to_json(const LyapunovCertificate& c);
json to_json(const ClassificationTable& t);
json to_json(const LemmaBoundsReport& r);

/// Columns: time, x_1..x_N, norm.
CsvTable trajectory_table(const Trajectory& tr, const std::string& name);
void write_csv(std::ostream& os, const CsvTable& table);

}  // namespace isslab
