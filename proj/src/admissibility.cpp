#include "isslab/admissibility.hpp"

#include "isslab/mild_solution.hpp"
#include "isslab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace isslab {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Auto: return "auto";
    case Strategy::PowerIteration: return "power-iteration";
    case Strategy::ProbeFamily: return "probe-family";
  }
  return "unknown";
}

std::string admissibility_verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "infinite-time-consistent";
    case Verdict::Inconclusive: return "finite-time";
    case Verdict::Divergent: return "divergent";
  }
  return "unknown";
}

namespace {

struct StepCoefficients {
  VectorXd decay, forcing, l11, l12, l22;
  double scale{1};  // 1/sqrt(dt): unit L^2 input norm <-> unit coefficient norm
};

StepCoefficients step_coefficients(const System& sys, double t, int steps) {
  if (!(t > 0.0)) throw std::invalid_argument("admissibility: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("admissibility: need at least one step");
  const double dt = t / steps;
  const Index N = sys.modes();
  StepCoefficients c;
  c.decay.resize(N), c.forcing.resize(N), c.l11.resize(N), c.l12.resize(N), c.l22.resize(N);
  for (Index n = 0; n < N; ++n) {
    const double r = sys.gen.rate(n);
    c.decay(n) = std::exp(-r * dt);
    c.forcing(n) = integrator_factor(r, dt);
    const PieceGram g = piece_gram(r, dt);
    c.l11(n) = std::sqrt(g.xx);
    c.l12(n) = g.xv / c.l11(n);
    c.l22(n) = std::sqrt(std::max(g.vv - g.xv * g.xv / g.xx, 0.0));
  }
  c.scale = 1.0 / std::sqrt(dt);
  return c;
}

VectorXd control_transpose(const Control& B, const VectorXd& g) {
  if (B.kind() == ControlKind::RankOne) return VectorXd::Constant(1, B.coefficients().dot(g));
  return B.coefficients().cwiseProduct(g);
}

MatrixXd forward(const System& sys, const StepCoefficients& c, const MatrixXd& w) {
  const Index N = sys.modes(), K = w.rows();
  MatrixXd y(K, 2 * N);
  VectorXd x = VectorXd::Zero(N);
  for (Index k = 0; k < K; ++k) {
    const VectorXd v = sys.control.apply(w.row(k).transpose() * c.scale);
    y.row(k).head(N) = (c.l11.cwiseProduct(x) + c.l12.cwiseProduct(v)).transpose();
    y.row(k).tail(N) = c.l22.cwiseProduct(v).transpose();
    x = c.decay.cwiseProduct(x) + c.forcing.cwiseProduct(v);
  }
  return y;
}

MatrixXd transpose(const System& sys, const StepCoefficients& c, const MatrixXd& y) {
  const Index N = sys.modes(), K = y.rows();
  MatrixXd w(K, sys.input_dim());
  VectorXd lam = VectorXd::Zero(N);
  for (Index k = K - 1; k >= 0; --k) {
    const VectorXd y1 = y.row(k).head(N).transpose(), y2 = y.row(k).tail(N).transpose();
    const VectorXd g = c.l12.cwiseProduct(y1) + c.l22.cwiseProduct(y2) + c.forcing.cwiseProduct(lam);
    lam = c.l11.cwiseProduct(y1) + c.decay.cwiseProduct(lam);
    w.row(k) = (control_transpose(sys.control, g) * c.scale).transpose();
  }
  return w;
}

bool is_geometric(const std::vector<double>& h) {
  if (h.size() < 2) return true;
  const double ratio = h[1] / h[0];
  if (!(ratio > 1.0)) return false;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h[i] / h[i - 1] - ratio) > 1e-9 * ratio) return false;
  return true;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++m;
  }
  const double den = m * sxx - sx * sx;
  if (m < 2 || den <= 0.0) return 0.0;
  return (m * sxy - sx * sy) / den;
}

}  // namespace

MatrixXd discretized_input_map(const System& sys, double t, int steps, const MatrixXd& w) {
  if (w.rows() != steps || w.cols() != sys.input_dim()) throw std::invalid_argument("discretized_input_map: bad input shape");
  return forward(sys, step_coefficients(sys, t, steps), w);
}

MatrixXd discretized_input_map_transpose(const System& sys, double t, int steps, const MatrixXd& y) {
  if (y.rows() != steps || y.cols() != 2 * sys.modes())
    throw std::invalid_argument("discretized_input_map_transpose: bad output shape");
  return transpose(sys, step_coefficients(sys, t, steps), y);
}

namespace {

// Largest eigenvalue of L^T L by Lanczos with full reorthogonalisation, where
// L is the discretized input map. Krylov acceleration of the power method:
// clustered top singular values (many modes with |H| close to the same
// sup) stall plain power iteration but not the Ritz values.
constexpr Index kDenseLimit = 512;

PowerIterationResult lanczos_top(const System& sys, const StepCoefficients& c, int steps, std::uint64_t seed,
                                 double tolerance, int max_iterations) {
  const Index m = sys.input_dim();
  const Index dim = steps * m;
  const int kmax = static_cast<int>(std::min<Index>({dim, Index(max_iterations), Index(300)}));
  PowerIterationResult res;
  res.steps = steps;
  if (sys.control.is_zero()) {
    res.converged = true;
    return res;
  }
  const auto apply = [&](const VectorXd& v) {
    const MatrixXd w = Eigen::Map<const MatrixXd>(v.data(), steps, m);
    const MatrixXd z = transpose(sys, c, forward(sys, c, w));
    return VectorXd(Eigen::Map<const VectorXd>(z.data(), dim));
  };
  if (dim <= kDenseLimit) {
    // Small problems: assemble L^T L column by column and solve exactly.
    MatrixXd G(dim, dim);
    for (Index j = 0; j < dim; ++j) G.col(j) = apply(VectorXd::Unit(dim, j));
    G = 0.5 * (G + G.transpose()).eval();
    const double top = Eigen::SelfAdjointEigenSolver<MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues()(dim - 1);
    res.sigma = std::sqrt(std::max(top, 0.0));
    res.iterations = static_cast<int>(dim);
    res.residual = 0.0;
    res.converged = true;
    return res;
  }
  UniformStream rng(seed);
  MatrixXd Q(dim, kmax + 1);
  VectorXd q(dim);
  for (Index i = 0; i < dim; ++i) q(i) = rng.uniform(-1.0, 1.0);
  Q.col(0) = q / q.norm();
  std::vector<double> alpha, beta;
  double previous = -1.0;
  int stagnant = 0;
  for (int k = 0; k < kmax; ++k) {
    VectorXd z = apply(Q.col(k));
    alpha.push_back(Q.col(k).dot(z));
    for (int pass = 0; pass < 2; ++pass) z -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * z);
    beta.push_back(z.norm());
    const int n = k + 1;
    // The Ritz solve is O(n^3); check every few steps once past the start.
    if (n > 8 && n % 4 != 0 && k + 1 < kmax && beta.back() > 1e-14 * std::abs(alpha.back())) {
      Q.col(k + 1) = z / beta.back();
      continue;
    }
    VectorXd d = Eigen::Map<const VectorXd>(alpha.data(), n), e(std::max(n - 1, 0));
    for (int i = 0; i + 1 < n; ++i) e(i) = beta[std::size_t(i)];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    const double theta = es.eigenvalues()(n - 1);
    res.iterations = n;
    res.sigma = std::sqrt(std::max(theta, 0.0));
    if (theta <= 0.0) {
      res.residual = 0.0;
      res.converged = true;
      break;
    }
    res.residual = beta.back() * std::abs(es.eigenvectors()(n - 1, n - 1)) / theta;
    stagnant = (previous > 0.0 && std::abs(theta - previous) <= 1e-14 * theta) ? stagnant + 1 : 0;
    if (res.residual < tolerance || stagnant >= 3 || beta.back() <= 1e-14 * theta) {
      res.converged = true;
      break;
    }
    previous = theta;
    Q.col(k + 1) = z / beta.back();
  }
  return res;
}

}  // namespace

PowerIterationResult input_map_operator_norm(const System& sys, double t, int steps, std::uint64_t seed,
                                             double tolerance, int max_iterations) {
  // A diagonal multiplier decouples the modes: the input map is a direct sum
  // of scalar maps and its norm is the largest of theirs.
  if (sys.control.kind() == ControlKind::DiagonalMultiplier && sys.modes() > 1) {
    const Index N = sys.modes();
    std::vector<PowerIterationResult> per(static_cast<std::size_t>(N));
    parallel_for(per.size(), [&](std::size_t i) {
      const Index n = static_cast<Index>(i);
      const System one = System::unchecked(Generator(VectorXd::Constant(1, sys.gen.eigenvalue(n)), sys.gen.shift()),
                                           Control::multiplier(VectorXd::Constant(1, sys.control.coefficients()(n)), sys.alpha()));
      per[i] = lanczos_top(one, step_coefficients(one, t, steps), steps, seed + i, tolerance, max_iterations);
    });
    PowerIterationResult res;
    res.steps = steps;
    res.converged = true;
    for (const auto& r : per) {
      if (r.sigma > res.sigma) res.sigma = r.sigma, res.residual = r.residual;
      res.iterations += r.iterations;
      res.converged = res.converged && r.converged;
    }
    return res;
  }
  return lanczos_top(sys, step_coefficients(sys, t, steps), steps, seed, tolerance, max_iterations);
}

ProbeSweep probe_sweep(const System& sys, double p, double q, double t, std::uint64_t seed, const ProbeOptions& opts) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("probe_sweep: exponents must be >= 1");
  if (!(t > 0.0) || std::isinf(t)) throw std::invalid_argument("probe_sweep: horizon must be finite and positive");
  const Index m = sys.input_dim();
  std::vector<GridSignal> candidates;
  std::vector<std::string> labels;
  if (opts.count > 0) {
    candidates = random_probe_family(seed, opts.count, {t, m, opts.pieces}, p);
    for (int i = 0; i < opts.count; ++i) {
      static const char* kinds[] = {"pattern", "bump", "chirp"};
      labels.push_back(std::string(kinds[i % 3]) + "-" + std::to_string(i));
    }
  }
  const VectorXd dir = VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  candidates.push_back(GridSignal::constant(dir, t));
  labels.push_back("constant");
  {
    MatrixXd v(2, m);
    v.row(0) = dir.transpose();
    v.row(1).setZero();
    candidates.emplace_back(std::vector<double>{0.0, t / 16.0, t}, v);
    labels.push_back("early-bump");
  }
  for (std::size_t i = 0; i < opts.extra.size(); ++i) {
    if (opts.extra[i].dim() != m) throw std::invalid_argument("probe_sweep: extra candidate has wrong dimension");
    candidates.push_back(discretize(opts.extra[i], t / 4096.0, t));
    labels.push_back("extra-" + std::to_string(i));
  }

  ProbeSweep out;
  out.ratios.assign(candidates.size(), 0.0);
  out.labels = labels;
  const VectorXd zero = VectorXd::Zero(sys.modes());
  parallel_for(candidates.size(), [&](std::size_t i) {
    const double un = lp_norm(candidates[i], p, t);
    if (un == 0.0 || sys.control.is_zero()) return;
    out.ratios[i] = state_lq_norm(sys, zero, candidates[i], q, t) / un;
  });
  for (std::size_t i = 0; i < out.ratios.size(); ++i)
    if (out.ratios[i] > out.best) out.best = out.ratios[i], out.best_label = out.labels[i];
  return out;
}

double admissibility_constant(const System& sys, double p, double q, double t, Strategy strategy, std::uint64_t seed,
                              const ProbeOptions& opts) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("admissibility_constant: exponents must be >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("admissibility_constant: horizon must be positive");
  if (strategy == Strategy::Auto) strategy = (p == 2.0 && q == 2.0) ? Strategy::PowerIteration : Strategy::ProbeFamily;
  if (strategy == Strategy::PowerIteration) {
    if (p != 2.0 || q != 2.0) throw std::invalid_argument("power iteration requires p = q = 2");
    const int steps = std::max(opts.min_steps, static_cast<int>(std::ceil(opts.steps_per_unit * t)));
    return input_map_operator_norm(sys, t, steps, seed, opts.tolerance, opts.max_iterations).sigma;
  }
  return probe_sweep(sys, p, q, t, seed, opts).best;
}

Verdict ladder_verdict(const std::vector<double>& c, double* plateau, double* growth) {
  if (c.size() < 2) throw std::invalid_argument("ladder_verdict: need at least two estimates");
  const double last = c.back(), prev = c[c.size() - 2], first = c.front();
  const double pl = prev > 0.0 ? last / prev : (last > 0.0 ? kInf : 1.0);
  const double gr = first > 0.0 ? last / first : (last > 0.0 ? kInf : 1.0);
  if (plateau) *plateau = pl;
  if (growth) *growth = gr;
  if (pl <= kPlateauRatio) return Verdict::Consistent;
  if (gr >= kDivergenceFactor) return Verdict::Divergent;
  return Verdict::Inconclusive;
}

AdmissibilityReport infinite_time_probe(const System& sys, double p, double q, const std::vector<double>& horizons,
                                        std::uint64_t seed, const ProbeOptions& opts, Strategy strategy) {
  if (horizons.size() < 4) throw std::invalid_argument("infinite_time_probe: need at least 4 horizons");
  if (!is_geometric(horizons)) throw std::invalid_argument("infinite_time_probe: horizons must form a geometric ladder");
  if (strategy == Strategy::Auto) strategy = (p == 2.0 && q == 2.0) ? Strategy::PowerIteration : Strategy::ProbeFamily;
  AdmissibilityReport r;
  r.p = p, r.q = q, r.horizons = horizons, r.method = strategy;
  double running = 0.0;
  for (double t : horizons) {
    running = std::max(running, admissibility_constant(sys, p, q, t, strategy, seed, opts));
    r.c_estimates.push_back(running);
  }
  r.verdict = ladder_verdict(r.c_estimates, &r.plateau_ratio, &r.growth);
  r.exponent = loglog_slope(horizons, r.c_estimates);
  return r;
}

FixedInputSweep fixed_input_sweep(const System& sys, const AnalyticSignal& u, double p, double q,
                                  const std::vector<double>& horizons, double step) {
  if (horizons.size() < 2) throw std::invalid_argument("fixed_input_sweep: need at least two horizons");
  FixedInputSweep out;
  out.horizons = horizons;
  const VectorXd zero = VectorXd::Zero(sys.modes());
  for (double t : horizons) {
    const GridSignal g = discretize(u, step, t);
    const double xs = state_lq_norm(sys, zero, g, q, t);
    const double us = lp_norm(u, p, t);
    out.state_norms.push_back(xs);
    out.input_norms.push_back(us);
    out.ratios.push_back(us > 0.0 ? xs / us : 0.0);
  }
  out.exponent = loglog_slope(horizons, out.ratios);
  out.verdict = ladder_verdict(out.ratios);
  return out;
}

double young_bound(const System& sys, double p, double q, double M, double omega) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("young_bound: exponents must be >= 1");
  if (p > q) throw std::invalid_argument("young_bound: requires p <= q");
  if (sys.alpha() != 0.0) throw std::invalid_argument("young_bound: requires a bounded control operator (alpha = 0)");
  if (!(M > 0.0) || !(omega > 0.0)) throw std::invalid_argument("young_bound: M and omega must be positive");
  const double inv_r = 1.0 - (1.0 / p - 1.0 / q);
  const double norm_b = sys.control.norm();
  if (inv_r == 0.0) return M * norm_b;
  return M * std::pow(omega / inv_r, -inv_r) * norm_b;
}

AdmissibilityReport maximal_regularity_probe(const System& sys, double p, const std::vector<double>& horizons,
                                             std::uint64_t seed, const ProbeOptions& opts) {
  if (!sys.stable()) throw std::domain_error("maximal_regularity_probe: generator is not stable");
  const VectorXd ab = -(sys.gen.rates().cwiseProduct(sys.control.coefficients()));
  const System lifted = System::unchecked(sys.gen, sys.control.with_coefficients(ab, 1.0), sys.label + "/A*B");
  return infinite_time_probe(lifted, p, p, horizons, seed, opts);
}

bool ClassificationTable::consistent() const {
  return std::all_of(arrows.begin(), arrows.end(), [](const ArrowCheck& a) { return a.satisfied; });
}

namespace {

std::string exponent_name(double p) {
  if (std::isinf(p)) return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace

ClassificationTable classify_admissibility(const System& sys, const std::vector<std::pair<double, double>>& pairs,
                                           const std::vector<double>& horizons, std::uint64_t seed,
                                           const ClassifyOptions& opts) {
  ClassificationTable table;
  for (const auto& [p, q] : pairs) {
    PairClassification pc;
    pc.p = p, pc.q = q;
    pc.infinite_time = infinite_time_probe(sys, p, q, horizons, seed, opts.probes);
    pc.finite_time = Verdict::Consistent;
    if (opts.family && opts.mode_ladder.size() >= 2) {
      for (Index modes : opts.mode_ladder) {
        const System s = opts.family(modes);
        ProbeOptions po = opts.probes;
        if (opts.extra_for_modes) po.extra = opts.extra_for_modes(modes);
        pc.truncation_modes.push_back(modes);
        pc.truncation_estimates.push_back(
            admissibility_constant(s, p, q, opts.refinement_window, Strategy::Auto, seed, po));
      }
      std::vector<double> running = pc.truncation_estimates;
      for (std::size_t i = 1; i < running.size(); ++i) running[i] = std::max(running[i], running[i - 1]);
      pc.finite_time = ladder_verdict(running);
    }
    // A pair that fails on finite windows cannot be infinite-time admissible.
    pc.infinite = pc.finite_time == Verdict::Divergent ? Verdict::Divergent : pc.infinite_time.verdict;
    table.pairs.push_back(pc);
  }

  auto name = [](const PairClassification& c) { return "L^" + exponent_name(c.p) + "-L^" + exponent_name(c.q); };
  for (const auto& a : table.pairs) {
    if (a.finite_time != Verdict::Consistent) continue;
    for (const auto& b : table.pairs) {
      if (&a == &b || !(b.p >= a.p && b.q <= a.q)) continue;
      table.arrows.push_back({name(a) + " => " + name(b) + " (finite time)", b.finite_time != Verdict::Divergent});
    }
  }
  if (sys.alpha() == 0.0 && sys.stable()) {
    for (const auto& a : table.pairs)
      if (a.p <= a.q)
        table.arrows.push_back({"bounded B, exponentially stable => infinite-time " + name(a),
                                a.infinite == Verdict::Consistent});
  }
  // Diagonal generators are analytic: L^p-L^p verdicts agree for p in (1,inf).
  for (const auto& a : table.pairs)
    for (const auto& b : table.pairs)
      if (&a < &b && a.p == a.q && b.p == b.q && a.p > 1.0 && b.p > 1.0 && !std::isinf(a.p) && !std::isinf(b.p))
        table.arrows.push_back({name(a) + " <=> " + name(b) + " (analytic)", a.infinite == b.infinite});
  return table;
}

}  // namespace isslab
