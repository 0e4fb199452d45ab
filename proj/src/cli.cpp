#include "isslab/cli.hpp"

#include "isslab/io.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace isslab {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string scenario;
  std::string claim;
  std::string p_text{"2"};
  std::string q_text{"2"};
  std::vector<double> horizons{1, 2, 4, 8, 16};
  Index modes{0};
  double dt{1e-2};
  double t_final{5.0};
  std::uint64_t seed{0};
  std::string out{"isslab-out"};
  std::string format{"csv"};
  std::string input;
  std::string construction{"auto"};
  int samples{100};
  int probes{100};
};

json config_json(const RunConfig& c) {
  json h = json::array();
  for (double t : c.horizons) h.push_back(t);
  return {{"command", c.command}, {"scenario", c.scenario}, {"claim", c.claim}, {"p", c.p_text}, {"q", c.q_text},
          {"horizons", h}, {"modes", c.modes}, {"dt", c.dt}, {"t_final", c.t_final}, {"seed", c.seed},
          {"format", c.format}, {"input", c.input}, {"construction", c.construction}, {"samples", c.samples},
          {"probes", c.probes}};
}

ScenarioSpec load_scenario(const std::string& id, Index modes) {
  if (id.empty()) throw ConfigError("missing scenario: pass --scenario <id|path.json>");
  const bool is_file = id.size() > 5 && id.substr(id.size() - 5) == ".json";
  if (!is_file) {
    const auto ids = catalog_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      std::string known;
      for (const auto& k : ids) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError("unknown scenario '" + id + "' (catalog: " + known + ")");
    }
    try {
      return scenario_by_id(id, modes);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid scenario parameters: ") + e.what());
    }
  }
  std::ifstream in(id);
  if (!in) throw ConfigError("cannot open scenario file '" + id + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + id + "': " + e.what());
  }
  try {
    if (modes > 0 && !j.contains("modes")) j["modes"] = modes;
    return scenario_from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError("invalid scenario description in '" + id + "': " + e.what());
  }
}

double exponent(const std::string& text, const char* flag) {
  try {
    return parse_exponent(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid ") + flag + ": " + e.what());
  }
}

class Emitter {
 public:
  Emitter(const RunConfig& cfg) : cfg_(cfg), root_(cfg.out) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out + "': " + ec.message());
  }

  void table(const CsvTable& t, const std::string& subdir = {}) {
    if (cfg_.format == "json") {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json o;
        for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i)
          o[t.header[i]] = std::isfinite(r[i]) ? json(r[i]) : json(format_number(r[i]));
        rows.push_back(o);
      }
      write_text(subdir, t.name + ".json", rows.dump(2) + "\n");
    } else {
      std::ostringstream os;
      write_csv(os, t);
      write_text(subdir, t.name + ".csv", os.str());
    }
  }

  void report(const std::string& name, const json& j, const std::string& subdir = {}) {
    write_text(subdir, name + ".json", j.dump(2) + "\n");
  }

  void manifest(const json& diagnostics, int status) {
    json files = json::array();
    for (const auto& f : files_) files.push_back(f);
    const json m = {{"tool", "isslab"},
                    {"version", kVersion},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
                    {"config", config_json(cfg_)},
                    {"diagnostics", diagnostics},
                    {"files", files},
                    {"exit_status", status}};
    std::ofstream(root_ / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  void write_text(const std::string& subdir, const std::string& file, const std::string& text) {
    const std::string rel = (subdir.empty() ? fs::path(file) : fs::path(subdir) / file).generic_string();
    if (std::find(files_.begin(), files_.end(), rel) != files_.end()) throw std::logic_error("output written twice: " + rel);
    const fs::path dir = subdir.empty() ? root_ : root_ / subdir;
    fs::create_directories(dir);
    std::ofstream(dir / file) << text;
    files_.push_back(rel);
  }

  const RunConfig& cfg_;
  fs::path root_;
  std::vector<std::string> files_;
};

json diagnostics_for(const ScenarioSpec& s) {
  const auto reg = control_regularity_norm(s.system.gen.with_shift(0.0), s.system.control);
  return {{"scenario", s.id},
          {"modes", s.system.modes()},
          {"control_regularity_norm", reg.value},
          {"control_regularity_tail_bound", reg.tail_bound},
          {"growth_bound", s.system.gen.growth_bound()}};
}

GridSignal simulation_input(const RunConfig& cfg, const ScenarioSpec& s) {
  if (cfg.input.empty()) return GridSignal::constant(VectorXd::Ones(s.system.input_dim()), cfg.t_final);
  std::ifstream in(cfg.input);
  if (!in) throw ConfigError("cannot open input file '" + cfg.input + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + cfg.input + "': " + e.what());
  }
  try {
    GridSignal u = j.contains("family") ? discretize(analytic_signal_from_json(j), cfg.dt, cfg.t_final) : grid_signal_from_json(j);
    if (u.dim() != s.system.input_dim()) throw std::invalid_argument("input dimension does not match the scenario");
    return u;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid input signal in '" + cfg.input + "': " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("--format must be csv or json");
  if (!(cfg.dt > 0.0)) throw ConfigError("--dt must be positive");
  if (!(cfg.t_final > 0.0)) throw ConfigError("--t-final must be positive");
  if (cfg.horizons.size() < 2) throw ConfigError("--horizons needs at least two values");
  for (std::size_t k = 0; k < cfg.horizons.size(); ++k)
    if (!(cfg.horizons[k] > 0.0) || (k && !(cfg.horizons[k] > cfg.horizons[k - 1])))
      throw ConfigError("--horizons must be positive and increasing");
  exponent(cfg.p_text, "--p");
  exponent(cfg.q_text, "--q");
  if (cfg.samples < 1 || cfg.probes < 0) throw ConfigError("--samples must be >= 1 and --probes >= 0");
}

int run_simulate(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  const GridSignal u = simulation_input(cfg, s);
  const Trajectory tr = trajectory(s.system, VectorXd::Zero(s.system.modes()), u, make_output_grid(cfg.t_final, cfg.dt));
  out.table(trajectory_table(tr, "trajectory"));
  return 0;
}

int run_norms(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  const double p = exponent(cfg.p_text, "--p"), q = exponent(cfg.q_text, "--q");
  const GridSignal u = simulation_input(cfg, s);
  const VectorXd x0 = VectorXd::Zero(s.system.modes());
  CsvTable t{"norms", {"t", "input_lp", "state_lq", "ratio"}, {}};
  for (double h : cfg.horizons) {
    const double un = lp_norm(u, p, h), xn = state_lq_norm(s.system, x0, u, q, h);
    t.rows.push_back({h, un, xn, un > 0.0 ? xn / un : 0.0});
  }
  out.table(t);
  return 0;
}

int run_admissibility(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  ProbeOptions po;
  po.count = cfg.probes;
  const AdmissibilityReport rep =
      infinite_time_probe(s.system, exponent(cfg.p_text, "--p"), exponent(cfg.q_text, "--q"), cfg.horizons, cfg.seed, po);
  out.report("admissibility", to_json(rep));
  CsvTable t{"c_ladder", {"horizon", "c_estimate"}, {}};
  for (std::size_t k = 0; k < rep.horizons.size(); ++k) t.rows.push_back({rep.horizons[k], rep.c_estimates[k]});
  out.table(t);
  return 0;
}

int run_maxreg(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  if (!s.system.stable()) throw ConfigError("maxreg needs an exponentially stable generator");
  // Maximal regularity is a property of A alone: probe A Phi with B = I.
  const System identity(s.system.gen, Control::multiplier(VectorXd::Ones(s.system.modes()), 0.0), s.id + "/identity");
  ProbeOptions po;
  po.count = cfg.probes;
  const AdmissibilityReport rep = maximal_regularity_probe(identity, exponent(cfg.p_text, "--p"), cfg.horizons, cfg.seed, po);
  out.report("maxreg", to_json(rep));
  CsvTable t{"maxreg_ladder", {"horizon", "c_estimate"}, {}};
  for (std::size_t k = 0; k < rep.horizons.size(); ++k) t.rows.push_back({rep.horizons[k], rep.c_estimates[k]});
  out.table(t);
  return 0;
}

int run_iss(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  IssOptions opts;
  opts.probes.count = cfg.probes;
  const IssGainReport rep = iss_gain_fit(s.system, exponent(cfg.p_text, "--p"), exponent(cfg.q_text, "--q"), cfg.horizons, cfg.seed, opts);
  out.report("iss", to_json(rep));
  CsvTable t{"iss_gains", {"horizon", "M", "G"}, {}};
  for (std::size_t k = 0; k < rep.M_estimates.size(); ++k) t.rows.push_back({rep.horizons[k], rep.M_estimates[k], rep.G_estimates[k]});
  out.table(t);
  return 0;
}

int run_lyapunov(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  const double q = exponent(cfg.q_text, "--q");
  std::string c = cfg.construction;
  if (c == "auto") c = s.kind == "heat_dirichlet" ? "heat" : "diag";
  LyapunovFunction V;
  try {
    if (c == "diag") V = make_v_diag(s.system);
    else if (c == "heat") V = make_v_heat(s.system);
    else if (c == "sup") V = make_v_sup(s.system, 0.5 * s.system.gen.rate(0));
    else if (c == "integral") V = make_v_integral_n(s.system, static_cast<int>(q));
    else throw ConfigError("--construction must be auto, diag, heat, sup or integral");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("construction not applicable: ") + e.what());
  }
  const LyapunovCertificate cert = check_dissipation(V, s.system, q, cfg.samples, cfg.seed);
  const HomogeneityCheck hom = check_homogeneity(V, V.degree, 20, cfg.seed, s.system.modes());
  json j = to_json(cert);
  j["homogeneity"] = {{"max_violation", hom.max_violation}, {"tolerance", hom.tolerance}, {"passed", hom.passed}};
  out.report("certificate", j);
  return 0;
}

int run_classify(const RunConfig& cfg, Emitter& out, json& diag) {
  const ScenarioSpec s = load_scenario(cfg.scenario, cfg.modes);
  diag = diagnostics_for(s);
  ClassifyOptions co;
  co.probes.count = std::min(cfg.probes, 20);
  std::vector<std::pair<double, double>> pairs{{2, 2}, {1, 2}, {2, kInf}, {2, 1}};
  if (s.kind == "diagonal_minus_n") {
    co.family = [](Index N) { return build_diagonal_minus_n(N); };
    co.mode_ladder = {16, 64, 256};
    co.extra_for_modes = [](Index N) { return std::vector<AnalyticSignal>{AnalyticSignal{IntervalIndicatorPerMode{N}, 1.0}}; };
    pairs = {{2, 2}, {2, kInf}};
  }
  const ClassificationTable table = classify_admissibility(s.system, pairs, cfg.horizons, cfg.seed, co);
  out.report("classification", to_json(table));
  CsvTable t{"classification_table", {"p", "q", "finite_time_consistent", "infinite_time_consistent"}, {}};
  for (const auto& pc : table.pairs)
    t.rows.push_back({pc.p, pc.q, pc.finite_time == Verdict::Consistent ? 1.0 : 0.0, pc.infinite == Verdict::Consistent ? 1.0 : 0.0});
  out.table(t);
  return table.consistent() ? 0 : 1;
}

int run_reproduce(const RunConfig& cfg, Emitter& out, json& diag) {
  std::vector<ScenarioSpec> specs;
  if (cfg.scenario == "all") {
    for (const auto& id : catalog_ids()) specs.push_back(scenario_by_id(id, id == "scalar_toy" ? 0 : cfg.modes));
  } else {
    specs.push_back(load_scenario(cfg.scenario, cfg.modes));
  }
  ReproduceConfig rc;
  rc.seed = cfg.seed;
  rc.probes = cfg.probes;
  json results = json::array();
  bool all_passed = true;
  for (const auto& s : specs) {
    std::vector<std::string> claims = s.claims;
    if (!cfg.claim.empty()) {
      if (std::find(claims.begin(), claims.end(), cfg.claim) == claims.end())
        throw ConfigError("unknown claim '" + cfg.claim + "' for scenario '" + s.id + "'");
      claims = {cfg.claim};
    }
    for (const auto& c : claims) {
      const ClaimReport r = reproduce(s, c, rc);
      const std::string dir = s.id + "/" + c;
      json summary = r.summary;
      summary["scenario"] = r.scenario;
      summary["claim"] = r.claim;
      summary["expected"] = r.expected;
      summary["observed"] = r.observed;
      summary["passed"] = r.passed;
      out.report("summary", summary, dir);
      for (const auto& t : r.tables) out.table(t, dir);
      results.push_back({{"scenario", r.scenario}, {"claim", r.claim}, {"passed", r.passed}, {"observed", r.observed}});
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.scenario << " " << r.claim << " (" << r.observed << ")\n";
      all_passed &= r.passed;
    }
    diag[s.id] = diagnostics_for(s);
  }
  diag["results"] = results;
  return all_passed ? 0 : 1;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Numerical checks of admissibility and input-to-state stability for diagonal systems", "isslab"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", cfg.scenario, "Catalog id or path to a scenario JSON file");
    sub->add_option("--p", cfg.p_text, "Input exponent in [1, inf], \"inf\" accepted");
    sub->add_option("--q", cfg.q_text, "State exponent in [1, inf], \"inf\" accepted");
    sub->add_option("--horizons", cfg.horizons, "Increasing list of time horizons");
    sub->add_option("--modes", cfg.modes, "Number of retained modes (catalog default 64)");
    sub->add_option("--dt", cfg.dt, "Output/discretization step");
    sub->add_option("--t-final", cfg.t_final, "Final simulation time");
    sub->add_option("--seed", cfg.seed, "Probe seed");
    sub->add_option("--out", cfg.out, "Output directory (created if absent)");
    sub->add_option("--format", cfg.format, "csv or json");
    sub->add_option("--probes", cfg.probes, "Random probes per window");
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Simulate the mild solution from x0 = 0"},
      {"norms", "Input L^p and state L^q norms over the horizons"},
      {"admissibility", "Admissibility constant ladder and infinite-time verdict"},
      {"maxreg", "Maximal L^p-regularity probe of the generator"},
      {"iss", "Fit the ISS constants M and G"},
      {"lyapunov", "Dissipation certificate for a Lyapunov construction"},
      {"classify", "Admissibility verdict table and implication checks"},
      {"reproduce", "Reproduce registered claims (--scenario all for the catalog)"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "simulate" || name == "norms") sub->add_option("--input", cfg.input, "Input signal JSON (default u = 1)");
    if (name == "reproduce") sub->add_option("--claim", cfg.claim, "Claim id (default: all claims of the scenario)");
    if (name == "lyapunov") {
      sub->add_option("--construction", cfg.construction, "auto, diag, heat, sup or integral");
      sub->add_option("--samples", cfg.samples, "Sample directions");
    }
    sub->callback([&cfg, name = name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    validate(cfg);
    if (cfg.scenario.empty()) throw ConfigError("missing scenario: pass --scenario <id|path.json>");
    Emitter out(cfg);
    json diag = json::object();
    int status = 0;
    if (cfg.command == "simulate") status = run_simulate(cfg, out, diag);
    else if (cfg.command == "norms") status = run_norms(cfg, out, diag);
    else if (cfg.command == "admissibility") status = run_admissibility(cfg, out, diag);
    else if (cfg.command == "maxreg") status = run_maxreg(cfg, out, diag);
    else if (cfg.command == "iss") status = run_iss(cfg, out, diag);
    else if (cfg.command == "lyapunov") status = run_lyapunov(cfg, out, diag);
    else if (cfg.command == "classify") status = run_classify(cfg, out, diag);
    else status = run_reproduce(cfg, out, diag);
    out.manifest(diag, status);
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: not applicable to this scenario: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace isslab
