#include "isslab/lyapunov.hpp"

#include "isslab/mild_solution.hpp"
#include "isslab/parallel.hpp"
#include "isslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>

namespace isslab {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::SupExp: return "sup-exp";
    case Construction::DiagQuadratic: return "diag-quadratic";
    case Construction::HeatKernel: return "heat-kernel";
    case Construction::IntegralHomogeneous: return "integral-homogeneous";
  }
  return "unknown";
}

namespace {

void require_state(const Generator& gen, const VectorXd& x, const char* what) {
  if (x.size() != gen.modes())
    throw std::invalid_argument(std::string(what) + ": state has " + std::to_string(x.size()) + " coefficients, generator has " +
                                std::to_string(gen.modes()));
}

// Geometric split points t_end 2^{-j} down to the fastest time scale.
std::vector<double> stiff_points(double t_end, double r_max) {
  std::vector<double> pts;
  for (double s = t_end / 2; s * r_max > 1e-2 && s > 1e-14; s /= 2) pts.push_back(s);
  std::reverse(pts.begin(), pts.end());
  return pts;
}

// Horizon beyond which the integrand of v_integral_n is below 1e-10 of V.
double integral_horizon(const Generator& gen, int n) {
  const double r1 = gen.rate(0), rmax = gen.rate(gen.modes() - 1);
  return std::log(1e10 * rmax / r1) / (n * r1);
}

}  // namespace

double v_sup(const Generator& gen, double lambda, const VectorXd& x) {
  require_state(gen, x, "v_sup");
  const double r1 = gen.rate(0);
  if (!(lambda > 0.0) || !(lambda < r1))
    throw std::domain_error("v_sup: lambda must lie in (0, lambda_1 - shift) = (0, " + std::to_string(r1) + ")");
  if (x.squaredNorm() == 0.0) return 0.0;
  const VectorXd k = 2.0 * (lambda - gen.rates().array()).matrix();  // all negative
  const VectorXd w = x.cwiseAbs2();
  const auto g = [&](double t) { return (w.array() * (k.array() * t).exp()).sum(); };

  constexpr double kTol = 1e-12;
  const double t_star = std::log(kTol) / (lambda - r1);
  std::vector<double> grid{0.0};
  for (int i = 1; i <= 512; ++i) grid.push_back(t_star * i / 512.0);
  for (double s = 1.0 / gen.rate(gen.modes() - 1); s < t_star; s *= 2) grid.push_back(s);
  std::sort(grid.begin(), grid.end());

  std::size_t best = 0;
  double gbest = g(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = g(grid[i]);
    if (v > gbest) gbest = v, best = i;
  }
  // Golden-section refinement on the neighbouring bracket.
  double lo = grid[best == 0 ? 0 : best - 1], hi = grid[std::min(best + 1, grid.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo), d = lo + invphi * (hi - lo);
  double gc = g(c), gd = g(d);
  while (hi - lo > 1e-10) {
    if (gc > gd) {
      hi = d, d = c, gd = gc;
      c = hi - invphi * (hi - lo), gc = g(c);
    } else {
      lo = c, c = d, gc = gd;
      d = lo + invphi * (hi - lo), gd = g(d);
    }
  }
  gbest = std::max({gbest, gc, gd});
  return std::sqrt(gbest);
}

SeriesValue<double> v_diag(const Generator& gen, const VectorXd& x) {
  require_state(gen, x, "v_diag");
  return {(x.cwiseAbs2().array() / gen.eigenvalues().array()).sum(), 0.0};
}

double v_heat(const Generator& gen, const VectorXd& x, HeatRoute route, double cell) {
  require_state(gen, x, "v_heat");
  if (gen.rule() != EigenRule::Quadratic || gen.rule_offset() != 0.0 || gen.shift() != 0.0)
    throw std::invalid_argument("v_heat: generator is not the Dirichlet heat generator a pi^2 n^2");
  if (route == HeatRoute::Spectral) return (x.cwiseAbs2().array() / gen.eigenvalues().array()).sum();

  const double a = gen.rule_scale() / (std::numbers::pi * std::numbers::pi);
  const Index N = x.size();
  const auto profile = [&](double xi) {
    double s = 0.0;
    for (Index n = 1; n <= N; ++n) s += x(n - 1) * std::sin(double(n) * std::numbers::pi * xi);
    return std::numbers::sqrt2 * s;
  };
  const GaussRule gl = gauss_legendre(5);
  const auto gauss = [&](double lo, double hi, auto&& f) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * f(c + h * gl.nodes[i]);
    return s * h;
  };
  const int cells = static_cast<int>(std::ceil(1.0 / cell - 1e-9));
  const auto tau_x = [&](double t) { return t * profile(t); };
  double F = 0.0, total = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double lo = double(k) / cells, hi = double(k + 1) / cells;
    total += gauss(lo, hi, [&](double xi) { return (1.0 - xi) * profile(xi) * (F + gauss(lo, xi, tau_x)); });
    F += gauss(lo, hi, tau_x);
  }
  return 2.0 * total / a;
}

double v_integral_n(const Generator& gen, int n, const VectorXd& x) {
  require_state(gen, x, "v_integral_n");
  if (n < 1) throw std::invalid_argument("v_integral_n: n must be >= 1");
  detail::require_invertible(gen, "v_integral_n");
  if (x.squaredNorm() == 0.0) return 0.0;
  const VectorXd r = gen.rates();
  const VectorXd w = x.cwiseAbs2();
  const auto f = [&](double t) { return std::pow((w.array() * (-2.0 * t * r.array()).exp()).sum(), 0.5 * n); };
  const double T = integral_horizon(gen, n);
  const auto pts = stiff_points(T, r(r.size() - 1));
  return integrate_split(f, 0.0, T, pts, 1e-13, 0.0).value;
}

double lie_derivative_v_diag(const System& sys, const VectorXd& x, const VectorXd& u0) {
  const VectorXd v = sys.control.apply(u0);
  const VectorXd dx = (-sys.gen.rates().array() * x.array() + v.array()).matrix();
  return 2.0 * (x.array() * dx.array() / sys.gen.eigenvalues().array()).sum();
}

double lie_derivative_v_integral2(const System& sys, const VectorXd& x, const VectorXd& u0) {
  const VectorXd v = sys.control.apply(u0);
  return -x.squaredNorm() + (x.array() * v.array() / sys.gen.rates().array()).sum();
}

LyapunovFunction make_v_sup(const System& sys, double lambda) {
  const Generator gen = sys.gen;
  v_sup(gen, lambda, VectorXd::Zero(gen.modes()));  // validates lambda
  LyapunovFunction V;
  V.construction = Construction::SupExp;
  V.degree = 1;
  V.c_lo = 1.0;
  V.c_hi = 1.0;
  V.value = [gen, lambda](const VectorXd& x) { return v_sup(gen, lambda, x); };
  return V;
}

LyapunovFunction make_v_diag(const System& sys) {
  LyapunovFunction V;
  V.construction = Construction::DiagQuadratic;
  V.degree = 2;
  V.c_lo = 0.0;
  V.c_hi = 1.0 / sys.gen.eigenvalue(0);
  const Generator gen = sys.gen;
  V.value = [gen](const VectorXd& x) { return v_diag(gen, x).value; };
  V.lie = [sys](const VectorXd& x, const VectorXd& u0) { return lie_derivative_v_diag(sys, x, u0); };
  return V;
}

LyapunovFunction make_v_heat(const System& sys, HeatRoute route) {
  const Generator gen = sys.gen;
  v_heat(gen, VectorXd::Zero(gen.modes()), HeatRoute::Spectral);  // validates the generator
  LyapunovFunction V;
  V.construction = Construction::HeatKernel;
  V.degree = 2;
  V.c_lo = 0.0;
  V.c_hi = 1.0 / gen.eigenvalue(0);
  V.quadrature = route == HeatRoute::Kernel;
  V.value = [gen, route](const VectorXd& x) { return v_heat(gen, x, route); };
  V.lie = [sys](const VectorXd& x, const VectorXd& u0) { return lie_derivative_v_diag(sys, x, u0); };
  return V;
}

LyapunovFunction make_v_integral_n(const System& sys, int n) {
  if (n < 1) throw std::invalid_argument("v_integral_n: n must be >= 1");
  if (!sys.stable()) throw std::domain_error("v_integral_n: generator is not exponentially stable");
  if (n * sys.alpha() >= 1.0)
    throw std::domain_error("v_integral_n: n * alpha = " + std::to_string(n * sys.alpha()) +
                            " >= 1, the construction needs n < 1/alpha");
  const Generator gen = sys.gen;
  LyapunovFunction V;
  V.construction = Construction::IntegralHomogeneous;
  V.degree = n;
  V.n = n;
  V.c_lo = 0.0;
  V.c_hi = 1.0 / (n * gen.rate(0));
  V.quadrature = true;
  V.value = [gen, n](const VectorXd& x) { return v_integral_n(gen, n, x); };
  // dV/dt = -||x||^n + n int ||T(t)x||^{n-2} <T(t)x, T(t)Bu0> dt.
  V.lie = [sys, n](const VectorXd& x, const VectorXd& u0) {
    const VectorXd v = sys.control.apply(u0);
    const VectorXd r = sys.gen.rates();
    const double xn = x.norm();
    if (n == 2) return lie_derivative_v_integral2(sys, x, u0);
    if (xn == 0.0) return n == 1 ? v_integral_n(sys.gen, 1, v) : 0.0;
    const VectorXd w = x.cwiseAbs2(), c = x.cwiseProduct(v);
    const auto f = [&](double t) {
      const Eigen::ArrayXd e = (-2.0 * t * r.array()).exp();
      return std::pow((w.array() * e).sum(), 0.5 * (n - 2)) * (c.array() * e).sum();
    };
    const double T = integral_horizon(sys.gen, n);
    const double I = integrate_split(f, 0.0, T, stiff_points(T, r(r.size() - 1)), 1e-13, 1e-15 * xn).value;
    return -std::pow(xn, n) + n * I;
  };
  return V;
}

DiniResult dini_lie_derivative(const LyapunovFunction& V, const System& sys, const VectorXd& x, const GridSignal& u,
                               const DiniSchedule& schedule) {
  if (!(schedule.h0 > 0.0) || schedule.j_max < schedule.j_min || schedule.tail < 1)
    throw std::invalid_argument("dini_lie_derivative: invalid step schedule");
  const double v0 = V.value(x);
  if (!std::isfinite(v0)) throw std::domain_error("dini_lie_derivative: V(x) is not finite");
  DiniResult out;
  for (int j = schedule.j_min; j <= schedule.j_max; ++j) {
    const double h = std::ldexp(schedule.h0, -j);
    const double vh = V.value(mild_solution(sys, x, u, h));
    if (!std::isfinite(vh)) throw std::domain_error("dini_lie_derivative: V is undefined along the trajectory");
    out.steps.push_back(h);
    out.quotients.push_back((vh - v0) / h);
  }
  const std::size_t k = std::min<std::size_t>(schedule.tail, out.quotients.size());
  out.value = *std::max_element(out.quotients.end() - static_cast<std::ptrdiff_t>(k), out.quotients.end());
  return out;
}

LyapunovCertificate check_dissipation(const LyapunovFunction& V, const System& sys, double q, int sample_count,
                                      std::uint64_t seed, const DiniSchedule& schedule) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("check_dissipation: q must be finite and >= 1");
  if (sample_count < 1) throw std::invalid_argument("check_dissipation: need at least one sample");
  const Index N = sys.modes(), m = sys.input_dim();

  // Directions: leading basis vectors, the last mode, then alternately
  // sphere-uniform and concentrated on the top quarter of the modes.
  UniformStream rng(seed);
  std::vector<VectorXd> dirs, udirs;
  for (Index n = 0; n < std::min<Index>(N, 4) && Index(dirs.size()) < sample_count; ++n) dirs.push_back(VectorXd::Unit(N, n));
  if (Index(dirs.size()) < sample_count && N > 4) dirs.push_back(VectorXd::Unit(N, N - 1));
  while (Index(dirs.size()) < sample_count) {
    if (dirs.size() % 2 == 0) {
      dirs.push_back(rng.unit_vector(N));
    } else {
      VectorXd v = VectorXd::Zero(N);
      const Index start = (3 * N) / 4;
      for (Index n = start; n < N; ++n) v(n) = rng.normal();
      if (v.norm() == 0.0) v(N - 1) = 1.0;
      dirs.push_back(v.normalized());
    }
  }
  // Input directions alternate between random and B^T x, the direction that
  // maximises the cross term of a diagonal quadratic V; random directions in
  // a many-dimensional U are nearly orthogonal to it.
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    VectorXd u = rng.unit_vector(m);
    if (i % 2 == 0 && m > 1) {
      const VectorXd aligned = sys.control.coefficients().cwiseProduct(dirs[i]);
      if (aligned.norm() > 0.0) u = aligned.normalized();
    }
    udirs.push_back(u);
  }

  // |u|/|x| then runs over a factor-2 grid from 1/16 to 160.
  static constexpr double kScales[] = {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  static constexpr double kLevels[] = {0.0, 1.0, -1.0, 10.0, -10.0};
  constexpr std::size_t kPerDir = std::size(kScales) * std::size(kLevels);
  std::vector<double> D(dirs.size() * kPerDir), X(D.size()), U(D.size());
  parallel_for(D.size(), [&](std::size_t i) {
    const std::size_t d = i / kPerDir, c = i % kPerDir;
    const VectorXd x = kScales[c / 5] * dirs[d];
    const VectorXd u0 = kLevels[c % 5] * udirs[d];
    X[i] = std::pow(x.norm(), q);
    U[i] = std::pow(u0.norm(), q);
    if (V.lie) {
      D[i] = V.lie(x, u0);
    } else {
      D[i] = dini_lie_derivative(V, sys, x, GridSignal::constant(u0, schedule.h0), schedule).value;
    }
  });

  LyapunovCertificate cert;
  cert.construction = V.construction;
  cert.degree = V.degree;
  cert.q = q;
  cert.c_lo = V.c_lo;
  cert.c_hi = V.c_hi;
  cert.samples = static_cast<int>(D.size());
  cert.max_derivative_at_zero_input = -kInf;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (U[i] == 0.0) cert.max_derivative_at_zero_input = std::max(cert.max_derivative_at_zero_input, D[i] / X[i]);

  constexpr double kSlack = 1e-6;
  double best_ratio = kInf;
  for (int ka = -10; ka <= 10; ++ka) {
    const double a3 = std::ldexp(1.0, ka);
    double need = 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < D.size() && feasible; ++i) {
      const double excess = D[i] + a3 * X[i] - kSlack;
      if (excess <= 0.0) continue;
      if (U[i] == 0.0) feasible = false;
      else need = std::max(need, excess / U[i]);
    }
    if (!feasible) continue;
    int kb = -10;
    while (kb <= 10 && std::ldexp(1.0, kb) < need) ++kb;
    if (kb > 10) continue;
    const double a4 = std::ldexp(1.0, kb);
    if (a3 < 1e-3) continue;
    if (a4 / a3 < best_ratio || (a4 / a3 == best_ratio && a3 > cert.a3)) {
      best_ratio = a4 / a3;
      cert.a3 = a3;
      cert.a4 = a4;
      cert.success = true;
    }
  }
  if (!cert.success)
    cert.message = cert.max_derivative_at_zero_input > 0.0
                       ? "dV/dt > 0 along free motion: no a3 > 0 exists"
                       : "no grid pair (a3 >= 1e-3, a4 <= 1024) satisfies every sample";
  return cert;
}

HomogeneityCheck check_homogeneity(const LyapunovFunction& V, double degree, int samples, std::uint64_t seed, Index modes) {
  static constexpr double kFactors[] = {-2.0, -0.5, 0.5, 3.0};
  UniformStream rng(seed);
  std::vector<VectorXd> xs;
  for (int i = 0; i < samples; ++i) {
    VectorXd x(modes);
    for (Index n = 0; n < modes; ++n) x(n) = rng.normal();
    xs.push_back(x);
  }
  std::vector<double> worst(xs.size(), 0.0);
  parallel_for(xs.size(), [&](std::size_t i) {
    const double base = V.value(xs[i]);
    for (double a : kFactors) {
      const double expect = std::pow(std::abs(a), degree) * base;
      const double got = V.value(a * xs[i]);
      worst[i] = std::max(worst[i], std::abs(got - expect) / std::max(std::abs(expect), 1e-300));
    }
  });
  HomogeneityCheck out;
  out.max_violation = worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
  out.tolerance = V.quadrature ? 1e-8 : 1e-12;
  out.passed = out.max_violation <= out.tolerance;
  return out;
}

LemmaBoundsReport lemma_bounds_check(const System& sys, const VectorXd& u0, const std::vector<double>& steps,
                                     const std::vector<double>& times) {
  const double alpha = sys.alpha();
  if (!(alpha < 1.0)) throw std::invalid_argument("lemma_bounds_check: needs alpha < 1");
  if (!sys.stable()) throw std::domain_error("lemma_bounds_check: generator is not exponentially stable");
  if (steps.size() < 2 || times.empty()) throw std::invalid_argument("lemma_bounds_check: need >= 2 steps and >= 1 time");
  const Generator& gen = sys.gen;
  const VectorXd r = gen.rates();
  LemmaBoundsReport rep;
  rep.alpha = alpha;
  rep.omega = alpha == 0.0 ? r(0) : 0.5 * r(0);
  rep.steps = steps;

  const VectorXd Bu = sys.control.apply(u0);
  const VectorXd ra = r.array().pow(-alpha);
  const double target = (ra.array() * Bu.array()).matrix().norm();  // ||A^{-alpha} B u0||

  const auto phi_h = [&](double h) {
    VectorXd v(r.size());
    for (Index n = 0; n < r.size(); ++n) v(n) = Bu(n) * integrator_factor(r(n), h);
    return v;
  };
  const auto weight = [&](double t) { return std::pow(t, -alpha) * std::exp(-rep.omega * t); };

  for (double t : times) {
    rep.C_operator = std::max(rep.C_operator, semigroup_power_norm(gen, alpha, t).value / weight(t));
    for (double h : steps) {
      const VectorXd y = phi_h(h);
      const double lhs = semigroup_apply(gen, t, y).norm();
      const double rhs = weight(t) * (ra.array() * y.array()).matrix().norm();
      if (rhs > 0.0) rep.C_empirical = std::max(rep.C_empirical, lhs / rhs);
    }
  }
  rep.smoothing_holds = rep.C_empirical <= rep.C_operator * (1.0 + 1e-12);

  const double h_min = *std::min_element(steps.begin(), steps.end());
  rep.limit_holds = true;
  for (double t : times) {
    const double lhs = semigroup_apply(gen, t, phi_h(h_min)).norm() / h_min;
    if (lhs > rep.C_empirical * target * weight(t) * (1.0 + 1e-12) + 1e-300) rep.limit_holds = false;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (double h : steps) {
    const double err = (ra.array() * (phi_h(h) / h - Bu).array()).matrix().norm();
    rep.limit_errors.push_back(err);
    if (err > 0.0) {
      const double lx = std::log(h), ly = std::log(err);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
    }
  }
  rep.limit_order = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : kInf;
  // The limit carries no rate for unbounded B (the tail beyond r_n h ~ 1
  // decays like a power of h set by alpha), so only ask for monotone decay.
  std::vector<std::size_t> order(steps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return steps[a] > steps[b]; });
  rep.limit_converges = true;
  for (std::size_t k = 1; k < order.size(); ++k)
    if (rep.limit_errors[order[k]] > rep.limit_errors[order[k - 1]] * (1.0 + 1e-12)) rep.limit_converges = false;
  const double err_large = rep.limit_errors[order.front()], err_small = rep.limit_errors[order.back()];
  if (!(err_small < err_large || err_large <= 1e-14 * std::max(target, 1e-300))) rep.limit_converges = false;
  return rep;
}

}  // namespace isslab
