#include "isslab/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace isslab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_exponent(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "infinity") return kInf;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("exponent '" + text + "' is not a number or \"inf\"");
  if (!(v >= 1.0)) throw std::invalid_argument("exponent " + text + " must be >= 1");
  return v;
}

json exponent_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

namespace {

json number_json(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

json vector_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number_json(v(i)));
  return a;
}

json series_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(std::string(what) + " must be an array of numbers");
    v(Index(i)) = j[i].get<double>();
  }
  return v;
}

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

Generator generator_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("generator must be a JSON object");
  const double shift = number_field(j, "shift", 0.0);
  if (j.contains("eigenvalues")) return Generator(vector_from_json(j["eigenvalues"], "generator.eigenvalues"), shift);
  if (!j.contains("rule") || !j["rule"].is_string()) throw std::invalid_argument("generator needs 'eigenvalues' or 'rule'");
  if (!j.contains("modes") || !j["modes"].is_number_integer()) throw std::invalid_argument("generator rule needs integer 'modes'");
  const std::string rule = j["rule"];
  const Index modes = j["modes"].get<Index>();
  const double scale = number_field(j, "scale", 1.0), offset = number_field(j, "offset", 0.0);
  if (rule == "linear") return Generator::linear(modes, scale, offset, shift);
  if (rule == "quadratic") return Generator::quadratic(modes, scale, offset, shift);
  throw std::invalid_argument("unknown eigenvalue rule '" + rule + "'");
}

json to_json(const Generator& g) {
  json j;
  switch (g.rule()) {
    case EigenRule::Explicit: j["eigenvalues"] = vector_json(g.eigenvalues()); break;
    case EigenRule::Linear:
    case EigenRule::Quadratic:
      j["rule"] = g.rule() == EigenRule::Linear ? "linear" : "quadratic";
      j["scale"] = g.rule_scale();
      j["offset"] = g.rule_offset();
      j["modes"] = g.modes();
      break;
  }
  j["shift"] = g.shift();
  return j;
}

Control control_from_json(const json& j, Index modes) {
  if (!j.is_object()) throw std::invalid_argument("control must be a JSON object");
  const std::string kind = j.value("kind", std::string("rank_one"));
  if (!j.contains("coefficients")) throw std::invalid_argument("control needs 'coefficients'");
  const VectorXd b = vector_from_json(j["coefficients"], "control.coefficients");
  if (b.size() != modes)
    throw std::invalid_argument("control has " + std::to_string(b.size()) + " coefficients, generator has " + std::to_string(modes) + " modes");
  const double alpha = number_field(j, "alpha", 0.0);
  if (kind == "rank_one") return Control::rank_one(b, alpha);
  if (kind == "multiplier") return Control::multiplier(b, alpha);
  throw std::invalid_argument("unknown control kind '" + kind + "'");
}

json to_json(const Control& b) {
  return {{"kind", b.kind() == ControlKind::RankOne ? "rank_one" : "multiplier"},
          {"coefficients", vector_json(b.coefficients())},
          {"alpha", b.alpha()}};
}

GridSignal grid_signal_from_json(const json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
    throw std::invalid_argument("grid signal needs 'breakpoints' and 'values'");
  std::vector<double> bp;
  for (const auto& v : j["breakpoints"]) {
    if (!v.is_number()) throw std::invalid_argument("breakpoints must be numbers");
    bp.push_back(v.get<double>());
  }
  const json& rows = j["values"];
  if (!rows.is_array() || rows.empty()) throw std::invalid_argument("values must be a non-empty array");
  const bool scalar = rows[0].is_number();
  const Index dim = scalar ? 1 : static_cast<Index>(rows[0].size());
  MatrixXd values(static_cast<Index>(rows.size()), dim);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (scalar) {
      if (!rows[k].is_number()) throw std::invalid_argument("values rows must all have the same shape");
      values(Index(k), 0) = rows[k].get<double>();
    } else {
      const VectorXd r = vector_from_json(rows[k], "values row");
      if (r.size() != dim) throw std::invalid_argument("values rows must all have the same shape");
      values.row(Index(k)) = r.transpose();
    }
  }
  if (j.contains("tail")) return GridSignal(bp, values, vector_from_json(j["tail"], "tail"));
  return GridSignal(bp, values);
}

AnalyticSignal analytic_signal_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family")) throw std::invalid_argument("analytic signal needs 'family'");
  const std::string family = j["family"];
  const double horizon = number_field(j, "horizon", kInf);
  if (family == "power_decay") return {PowerDecay{number_field(j, "theta", 0.75)}, horizon};
  if (family == "constant") return {ConstantLevel{number_field(j, "value", 1.0)}, horizon};
  if (family == "indicator") {
    if (!j.contains("modes") || !j["modes"].is_number_integer()) throw std::invalid_argument("indicator signal needs integer 'modes'");
    return {IntervalIndicatorPerMode{j["modes"].get<Index>()}, horizon};
  }
  throw std::invalid_argument("unknown signal family '" + family + "'");
}

json to_json(const GridSignal& u) {
  json rows = json::array();
  for (Index k = 0; k < u.pieces(); ++k) rows.push_back(vector_json(u.values.row(k).transpose()));
  return {{"breakpoints", series_json(u.breakpoints)}, {"values", rows}, {"tail", vector_json(u.tail)}};
}

json to_json(const AdmissibilityReport& r) {
  return {{"p", exponent_json(r.p)},
          {"q", exponent_json(r.q)},
          {"horizons", series_json(r.horizons)},
          {"c_estimates", series_json(r.c_estimates)},
          {"method", to_string(r.method)},
          {"plateau_ratio", number_json(r.plateau_ratio)},
          {"growth", number_json(r.growth)},
          {"exponent", number_json(r.exponent)},
          {"verdict", admissibility_verdict_name(r.verdict)}};
}

json to_json(const FixedInputSweep& r) {
  return {{"horizons", series_json(r.horizons)},
          {"state_norms", series_json(r.state_norms)},
          {"input_norms", series_json(r.input_norms)},
          {"ratios", series_json(r.ratios)},
          {"exponent", number_json(r.exponent)},
          {"verdict", admissibility_verdict_name(r.verdict)}};
}

json to_json(const StabilityCheck& r) {
  return {{"q", exponent_json(r.q)},
          {"horizon", r.horizon},
          {"omega_fit", number_json(r.omega_fit)},
          {"datko_integral", number_json(r.datko_integral)},
          {"tail_bound", number_json(r.tail_bound)},
          {"half_horizon_integral", number_json(r.half_horizon_integral)},
          {"growth", number_json(r.growth)},
          {"stable", r.stable}};
}

json to_json(const IssGainReport& r) {
  json j = {{"p", exponent_json(r.p)},
            {"q", exponent_json(r.q)},
            {"horizons", series_json(r.horizons)},
            {"M_estimates", series_json(r.M_estimates)},
            {"G_estimates", series_json(r.G_estimates)},
            {"M", number_json(r.M)},
            {"G", number_json(r.G)},
            {"decay_rate", number_json(r.decay_rate)},
            {"probe_count", r.probe_count},
            {"worst_ratio", number_json(r.worst_ratio)},
            {"worst_violation", number_json(r.worst_violation)},
            {"M_plateau", number_json(r.M_plateau)},
            {"G_plateau", number_json(r.G_plateau)},
            {"verdict", iss_verdict_name(r.verdict)}};
  if (!r.admissibility.c_estimates.empty()) j["admissibility"] = to_json(r.admissibility);
  if (r.datko) j["datko"] = to_json(*r.datko);
  return j;
}

json to_json(const LyapunovCertificate& c) {
  return {{"construction", to_string(c.construction)},
          {"degree", c.degree},
          {"q", c.q},
          {"coercivity", {{"c_lo", number_json(c.c_lo)}, {"c_hi", number_json(c.c_hi)}}},
          {"dissipation", {{"a3", c.a3}, {"a4", c.a4}}},
          {"success", c.success},
          {"samples", c.samples},
          {"max_derivative_at_zero_input", number_json(c.max_derivative_at_zero_input)},
          {"message", c.message}};
}

json to_json(const ClassificationTable& t) {
  json pairs = json::array();
  for (const auto& pc : t.pairs) {
    json e = {{"p", exponent_json(pc.p)},
              {"q", exponent_json(pc.q)},
              {"finite_time", admissibility_verdict_name(pc.finite_time)},
              {"infinite_time", admissibility_verdict_name(pc.infinite)},
              {"horizon_ladder", to_json(pc.infinite_time)}};
    if (!pc.truncation_modes.empty()) {
      json modes = json::array();
      for (Index n : pc.truncation_modes) modes.push_back(n);
      e["truncation_modes"] = modes;
      e["truncation_estimates"] = series_json(pc.truncation_estimates);
    }
    pairs.push_back(e);
  }
  json arrows = json::array();
  for (const auto& a : t.arrows) arrows.push_back({{"relation", a.description}, {"satisfied", a.satisfied}});
  return {{"pairs", pairs}, {"arrows", arrows}, {"consistent", t.consistent()}};
}

json to_json(const LemmaBoundsReport& r) {
  return {{"alpha", r.alpha},
          {"omega", r.omega},
          {"C_empirical", number_json(r.C_empirical)},
          {"C_operator", number_json(r.C_operator)},
          {"smoothing_holds", r.smoothing_holds},
          {"limit_holds", r.limit_holds},
          {"steps", series_json(r.steps)},
          {"limit_errors", series_json(r.limit_errors)},
          {"limit_order", number_json(r.limit_order)},
          {"limit_converges", r.limit_converges}};
}

CsvTable trajectory_table(const Trajectory& tr, const std::string& name) {
  CsvTable t;
  t.name = name;
  t.header.push_back("time");
  for (Index n = 1; n <= tr.states.rows(); ++n) t.header.push_back("x" + std::to_string(n));
  t.header.push_back("norm");
  const VectorXd norms = tr.norms();
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    for (Index n = 0; n < tr.states.rows(); ++n) row.push_back(tr.states(n, Index(k)));
    row.push_back(norms(Index(k)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

}  // namespace isslab
