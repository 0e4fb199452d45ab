#include "isslab/iss.hpp"

#include "isslab/mild_solution.hpp"
#include "isslab/parallel.hpp"
#include "isslab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace isslab {

std::string iss_verdict_name(IssVerdict v) {
  switch (v) {
    case IssVerdict::Consistent: return "ISS-consistent";
    case IssVerdict::Inconclusive: return "inconclusive";
    case IssVerdict::NotIss: return "not-ISS";
  }
  return "unknown";
}

namespace {

// int_0^H ||T(t)x||^q dt.
double datko_integral(const Generator& gen, const VectorXd& x, double q, double H) {
  const VectorXd r = gen.rates();
  if (q == 2.0) {
    double s = 0.0;
    for (Index n = 0; n < x.size(); ++n) {
      const double k = 2.0 * r(n);
      s += x(n) * x(n) * (k == 0.0 ? H : -std::expm1(-k * H) / k);
    }
    return s;
  }
  const auto f = [&](double t) { return std::pow(semigroup_apply(gen, t, x).norm(), q); };
  // Resolve the fast modes near t = 0 with geometric split points.
  std::vector<double> points;
  for (double s = H / 2; s * std::abs(r(r.size() - 1)) > 1e-2 && s > 1e-12; s /= 2) points.push_back(s);
  std::sort(points.begin(), points.end());
  return integrate_split(f, 0.0, H, points, 1e-12, 0.0).value;
}

std::vector<VectorXd> state_probe_set(Index modes, int count, std::uint64_t seed) {
  std::vector<VectorXd> xs;
  for (Index n = 0; n < std::min<Index>(modes, 8); ++n) xs.push_back(VectorXd::Unit(modes, n));
  UniformStream rng(seed ^ 0x5bd1e995u);
  for (int i = 0; i < count; ++i) xs.push_back(rng.unit_vector(modes));
  return xs;
}

double sorted_ladder_check(const std::vector<double>& horizons) {
  if (horizons.size() < 2) throw std::invalid_argument("need at least two horizons");
  for (std::size_t k = 1; k < horizons.size(); ++k)
    if (!(horizons[k] > horizons[k - 1])) throw std::invalid_argument("horizons must be increasing");
  if (!(horizons.front() > 0.0) || std::isinf(horizons.back())) throw std::invalid_argument("horizons must be finite and positive");
  return horizons.back();
}

}  // namespace

StabilityCheck exponential_stability_check(const Generator& gen, double q, double horizon, const std::optional<VectorXd>& x) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("exponential_stability_check: q must be finite and >= 1");
  if (!(horizon > 0.0) || std::isinf(horizon)) throw std::invalid_argument("exponential_stability_check: horizon must be finite and positive");
  const VectorXd probe = x ? *x : VectorXd::Unit(gen.modes(), 0);
  if (probe.size() != gen.modes()) throw std::invalid_argument("exponential_stability_check: probe has wrong dimension");

  StabilityCheck out;
  out.q = q;
  out.horizon = horizon;

  // Least-squares slope of log ||T(t)e_1|| on a uniform grid.
  const VectorXd e1 = VectorXd::Unit(gen.modes(), 0);
  constexpr int kSamples = 33;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = horizon * k / (kSamples - 1);
    const double y = std::log(semigroup_apply(gen, t, e1).norm());
    st += t, sy += y, stt += t * t, sty += t * y;
  }
  out.omega_fit = -(kSamples * sty - st * sy) / (kSamples * stt - st * st);

  if (probe.squaredNorm() == 0.0) {
    out.stable = out.omega_fit > 0.0;
    return out;
  }
  out.datko_integral = datko_integral(gen, probe, q, horizon);
  out.half_horizon_integral = datko_integral(gen, probe, q, horizon / 2);
  out.growth = out.half_horizon_integral > 0.0 ? out.datko_integral / out.half_horizon_integral : kInf;
  // ||T(t)x|| <= e^{-r_1 (t-H)} ||T(H)x|| for t >= H.
  const double r1 = gen.rate(0);
  out.tail_bound = r1 > 0.0 ? std::pow(semigroup_apply(gen, horizon, probe).norm(), q) / (q * r1) : kInf;
  out.stable = out.omega_fit > 0.0 && out.tail_bound < 0.01 * out.datko_integral;
  return out;
}

IssGainReport iss_gain_fit(const System& sys, double p, double q, const std::vector<double>& horizons,
                           std::uint64_t seed, const IssOptions& opts) {
  const double t_max = sorted_ladder_check(horizons);
  IssGainReport rep;
  rep.p = p;
  rep.q = q;
  rep.horizons = horizons;

  if (!sys.stable()) {
    rep.datko = exponential_stability_check(sys.gen, std::isinf(q) ? 2.0 : q, t_max);
    rep.verdict = IssVerdict::NotIss;
    return rep;
  }

  // M(t): free motion over the state probes.
  const auto xs = state_probe_set(sys.modes(), opts.state_probes, seed);
  const GridSignal no_input = GridSignal::zero(sys.input_dim(), t_max);
  std::vector<double> slot(xs.size() * horizons.size());
  parallel_for(slot.size(), [&](std::size_t i) {
    const auto& x = xs[i / horizons.size()];
    slot[i] = state_lq_norm(sys, x, no_input, q, horizons[i % horizons.size()]) / x.norm();
  });
  rep.M_estimates.assign(horizons.size(), 0.0);
  for (std::size_t i = 0; i < slot.size(); ++i)
    rep.M_estimates[i % horizons.size()] = std::max(rep.M_estimates[i % horizons.size()], slot[i]);
  for (std::size_t k = 1; k < horizons.size(); ++k) rep.M_estimates[k] = std::max(rep.M_estimates[k], rep.M_estimates[k - 1]);

  // G(t): the admissibility ladder itself.
  rep.admissibility = infinite_time_probe(sys, p, q, horizons, seed, opts.probes);
  rep.G_estimates = rep.admissibility.c_estimates;
  rep.M = rep.M_estimates.back();
  rep.G = rep.G_estimates.back();

  // Combined probes: the residual gain after removing the free motion.
  const auto inputs = random_probe_family(seed + 1, opts.combined_probes, {t_max, sys.input_dim(), opts.probes.pieces}, p);
  UniformStream rng(seed ^ 0x2545f491u);
  std::vector<VectorXd> starts;
  for (std::size_t i = 0; i < inputs.size(); ++i) starts.push_back(std::pow(10.0, double(i % 3) - 1.0) * rng.unit_vector(sys.modes()));
  std::vector<double> ratios(inputs.size(), 0.0);
  parallel_for(inputs.size(), [&](std::size_t i) {
    const double un = lp_norm(inputs[i], p, t_max);
    if (un == 0.0) return;
    ratios[i] = (state_lq_norm(sys, starts[i], inputs[i], q, t_max) - rep.M * starts[i].norm()) / un;
  });
  rep.worst_ratio = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  rep.G = std::max(rep.G, rep.worst_ratio);
  rep.probe_count = static_cast<int>(xs.size() + inputs.size()) + opts.probes.count;

  double growth_m = 0, growth_g = 0;
  const Verdict vm = ladder_verdict(rep.M_estimates, &rep.M_plateau, &growth_m);
  const Verdict vg = ladder_verdict(rep.G_estimates, &rep.G_plateau, &growth_g);
  if (vm == Verdict::Consistent && vg == Verdict::Consistent)
    rep.verdict = IssVerdict::Consistent;
  else if (vm == Verdict::Divergent || vg == Verdict::Divergent)
    rep.verdict = IssVerdict::NotIss;
  else
    rep.verdict = IssVerdict::Inconclusive;
  return rep;
}

IssGainReport p_infty_bridge(const System& sys, double p, const std::vector<double>& horizons, std::uint64_t seed,
                             const IssOptions& opts) {
  const double t_max = sorted_ladder_check(horizons);
  if (!(p >= 1.0)) throw std::invalid_argument("p_infty_bridge: p must be >= 1");
  const double alpha = sys.alpha();
  if (alpha > 0.0 && !(1.0 / p < 1.0 - alpha))
    throw std::domain_error("p_infty_bridge: B in X_{-alpha} is only known to be L^p-admissible for p > 1/(1-alpha)");
  IssGainReport rep;
  rep.p = p;
  rep.q = kInf;
  rep.horizons = horizons;
  if (!sys.stable()) {
    rep.datko = exponential_stability_check(sys.gen, 2.0, t_max);
    rep.verdict = IssVerdict::NotIss;
    return rep;
  }
  const double a = sys.gen.rate(0);
  rep.decay_rate = a;

  const auto grid = make_output_grid(t_max, t_max / 256.0, 12);
  const auto xs = state_probe_set(sys.modes(), opts.state_probes, seed);
  const auto inputs = random_probe_family(seed, opts.probes.count, {t_max, sys.input_dim(), opts.probes.pieces}, p);
  const GridSignal no_input = GridSignal::zero(sys.input_dim(), t_max);
  const VectorXd zero_state = VectorXd::Zero(sys.modes());

  // M = sup ||T(t)x|| e^{at} / ||x||.
  std::vector<double> m_slot(xs.size(), 0.0);
  parallel_for(xs.size(), [&](std::size_t i) {
    const Trajectory tr = trajectory(sys, xs[i], no_input, grid);
    const VectorXd nrm = tr.norms();
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      m_slot[i] = std::max(m_slot[i], nrm(Index(k)) * std::exp(a * tr.times[k]) / xs[i].norm());
  });
  rep.M = *std::max_element(m_slot.begin(), m_slot.end());

  // G = sup ||Phi_t u|| / ||u||_{L^p([0,t])} along each trajectory.
  std::vector<double> g_slot(inputs.size(), 0.0);
  parallel_for(inputs.size(), [&](std::size_t i) {
    const Trajectory tr = trajectory(sys, zero_state, inputs[i], grid);
    const VectorXd nrm = tr.norms();
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
      const double un = lp_norm(inputs[i], p, tr.times[k]);
      if (un > 0.0) g_slot[i] = std::max(g_slot[i], nrm(Index(k)) / un);
    }
  });
  rep.G = g_slot.empty() ? 0.0 : *std::max_element(g_slot.begin(), g_slot.end());

  // Envelope check on combined trajectories.
  const int combined = std::min<int>(opts.combined_probes, static_cast<int>(inputs.size()));
  UniformStream rng(seed ^ 0x9e3779b9u);
  std::vector<VectorXd> starts;
  for (int i = 0; i < combined; ++i) starts.push_back(std::pow(10.0, double(i % 3) - 1.0) * rng.unit_vector(sys.modes()));
  std::vector<double> v_slot(std::size_t(combined), -kInf);
  parallel_for(std::size_t(combined), [&](std::size_t i) {
    const Trajectory tr = trajectory(sys, starts[i], inputs[i], grid);
    const VectorXd nrm = tr.norms();
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double env = rep.M * starts[i].norm() * std::exp(-a * tr.times[k]) + rep.G * lp_norm(inputs[i], p, tr.times[k]);
      v_slot[i] = std::max(v_slot[i], nrm(Index(k)) - env);
    }
  });
  rep.worst_violation = v_slot.empty() ? 0.0 : *std::max_element(v_slot.begin(), v_slot.end());
  rep.probe_count = static_cast<int>(xs.size() + inputs.size()) + combined;
  rep.M_estimates = {rep.M};
  rep.G_estimates = {rep.G};
  rep.verdict = rep.worst_violation <= 1e-12 * std::max(1.0, rep.M) ? IssVerdict::Consistent : IssVerdict::Inconclusive;
  return rep;
}

}  // namespace isslab
