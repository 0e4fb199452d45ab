#include "isslab/mild_solution.hpp"

#include "isslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isslab {

double integrator_factor(double rate, double dt) {
  const double x = rate * dt;
  if (std::abs(x) < 1e-8) return dt - rate * dt * dt / 2.0;
  return -std::expm1(-x) / rate;
}

VectorXd step(const System& sys, const VectorXd& x, const VectorXd& u, double dt, bool* used_series) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (x.size() != sys.modes()) throw std::invalid_argument("step: state dimension mismatch");
  const VectorXd v = sys.control.apply(u);
  VectorXd out(x.size());
  bool series = false;
  for (Index n = 0; n < x.size(); ++n) {
    const double r = sys.gen.rate(n);
    series = series || std::abs(r * dt) < 1e-8;
    out(n) = std::exp(-r * dt) * x(n) + v(n) * integrator_factor(r, dt);
  }
  if (used_series) *used_series = series;
  return out;
}

VectorXd Trajectory::norms() const {
  VectorXd out(states.cols());
  for (Index k = 0; k < states.cols(); ++k) out(k) = states.col(k).norm();
  return out;
}

std::vector<double> make_output_grid(double t_final, double dt, int geometric_levels) {
  if (!(t_final > 0.0) || !(dt > 0.0)) throw std::invalid_argument("make_output_grid: t_final and dt must be positive");
  std::vector<double> grid{0.0};
  const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  for (long k = 1; k < steps; ++k) grid.push_back(double(k) * dt);
  grid.push_back(t_final);
  for (int j = 1; j <= geometric_levels; ++j) grid.push_back(t_final * std::ldexp(1.0, -j));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Trajectory trajectory(const System& sys, const VectorXd& x0, const GridSignal& u, std::vector<double> grid) {
  if (x0.size() != sys.modes()) throw std::invalid_argument("trajectory: initial state dimension mismatch");
  if (u.dim() != sys.input_dim()) throw std::invalid_argument("trajectory: input dimension mismatch");
  if (grid.empty()) throw std::invalid_argument("trajectory: empty output grid");
  for (double t : grid)
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("trajectory: grid times must be finite and >= 0");
  const double t_end = *std::max_element(grid.begin(), grid.end());
  grid.push_back(0.0);
  for (double b : u.breakpoints)
    if (b > 0.0 && b < t_end) grid.push_back(b);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  Trajectory out;
  out.times = grid;
  out.input = u;
  out.states.resize(sys.modes(), static_cast<Index>(grid.size()));
  out.states.col(0) = x0;
  VectorXd x = x0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    bool series = false;
    x = step(sys, x, u.value_at(grid[k]), grid[k + 1] - grid[k], &series);
    out.states.col(static_cast<Index>(k + 1)) = x;
    out.steps.push_back({grid[k], grid[k + 1], series});
  }
  return out;
}

VectorXd mild_solution(const System& sys, const VectorXd& x0, const GridSignal& u, double t) {
  if (t < 0.0) throw std::invalid_argument("mild_solution: negative time");
  if (x0.size() != sys.modes()) throw std::invalid_argument("mild_solution: state dimension mismatch");
  VectorXd x = x0;
  double now = 0.0;
  for (Index k = 0; k < u.pieces() && now < t; ++k) {
    const double next = std::min(u.breakpoints[static_cast<std::size_t>(k) + 1], t);
    x = step(sys, x, u.values.row(k).transpose(), next - now);
    now = next;
  }
  if (now < t) x = step(sys, x, u.tail, t - now);
  return x;
}

VectorXd input_map(const System& sys, const GridSignal& u, double t) {
  return mild_solution(sys, VectorXd::Zero(sys.modes()), u, t);
}

PieceGram piece_gram(double r, double dt) {
  const double x = r * dt;
  PieceGram g{};
  g.xx = integrator_factor(2.0 * r, dt);
  if (std::abs(x) < 0.1) {
    // Taylor series of int e^{-rs}(1-e^{-rs})/r and int (1-e^{-rs})^2/r^2.
    double xv = 0.0, vv = 0.0, xpow = 1.0, prev = 0.0, fact = 1.0, two = 2.0;
    for (int k = 1; k <= 16; ++k) {
      fact *= k;
      if (k > 1) prev = xpow, xpow *= -x;  // xpow = (-x)^{k-1}, prev = (-x)^{k-2}
      xv += (two - 1.0) / (fact * (k + 1)) * xpow;
      if (k >= 2) vv += (two - 2.0) / (fact * (k + 1)) * prev;
      two *= 2.0;
    }
    g.xv = dt * dt * xv;
    g.vv = dt * dt * dt * vv;
  } else {
    const double f1 = integrator_factor(r, dt), f2 = g.xx;
    g.xv = (f1 - f2) / r;
    g.vv = (dt - 2.0 * f1 + f2) / (r * r);
  }
  return g;
}

VectorXd piece_square_integrals(const VectorXd& rates, const VectorXd& x, const VectorXd& v, double dt) {
  VectorXd out(rates.size());
  for (Index n = 0; n < rates.size(); ++n) {
    const PieceGram g = piece_gram(rates(n), dt);
    out(n) = x(n) * x(n) * g.xx + 2.0 * x(n) * v(n) * g.xv + v(n) * v(n) * g.vv;
  }
  return out;
}

namespace {

VectorXd state_within_piece(const VectorXd& rates, const VectorXd& x, const VectorXd& v, double s) {
  VectorXd out(rates.size());
  for (Index n = 0; n < rates.size(); ++n)
    out(n) = std::exp(-rates(n) * s) * x(n) + v(n) * integrator_factor(rates(n), s);
  return out;
}

// Split points dt 2^{-j} down to the fastest time scale in the piece.
std::vector<double> stiff_layer_points(const VectorXd& rates, double dt) {
  const double rmax = rates.cwiseAbs().maxCoeff();
  std::vector<double> pts;
  for (double s = dt / 2.0; s * rmax > 1e-2 && pts.size() < 60; s /= 2.0) pts.push_back(s);
  return pts;
}

double piece_sup_norm(const VectorXd& rates, const VectorXd& x, const VectorXd& v, double dt) {
  auto f = [&](double s) { return state_within_piece(rates, x, v, s).norm(); };
  std::vector<double> samples{0.0, dt};
  for (int i = 1; i < 32; ++i) samples.push_back(dt * i / 32.0);
  for (double s : stiff_layer_points(rates, dt)) samples.push_back(s);
  std::sort(samples.begin(), samples.end());
  std::size_t best = 0;
  double best_val = -1.0;
  std::vector<double> vals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    vals[i] = f(samples[i]);
    if (vals[i] > best_val) best_val = vals[i], best = i;
  }
  if (best == 0 || best + 1 == samples.size()) return best_val;
  // Golden-section refinement inside the neighbouring bracket.
  double a = samples[best - 1], b = samples[best + 1];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * dt; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  return std::max({best_val, fc, fd});
}

}  // namespace

double state_lq_norm(const System& sys, const VectorXd& x0, const GridSignal& u, double q, double t) {
  if (!(q >= 1.0)) throw std::invalid_argument("state_lq_norm: q must be >= 1");
  if (!(t >= 0.0) || std::isinf(t)) throw std::invalid_argument("state_lq_norm: window must be finite");
  if (x0.size() != sys.modes()) throw std::invalid_argument("state_lq_norm: state dimension mismatch");
  const VectorXd rates = sys.gen.rates();
  const bool sup = std::isinf(q);
  double acc = 0.0;
  VectorXd x = x0;
  auto process = [&](const VectorXd& uval, double dt) {
    if (dt <= 0.0) return;
    const VectorXd v = sys.control.apply(uval);
    if (sup) {
      acc = std::max(acc, piece_sup_norm(rates, x, v, dt));
    } else if (q == 2.0) {
      acc += piece_square_integrals(rates, x, v, dt).sum();
    } else {
      auto f = [&](double s) { return std::pow(state_within_piece(rates, x, v, s).norm(), q); };
      const std::vector<double> pts = stiff_layer_points(rates, dt);
      acc += integrate_split(f, 0.0, dt, pts, 1e-11, 1e-300).value;
    }
    x = state_within_piece(rates, x, v, dt);
  };
  double now = 0.0;
  for (Index k = 0; k < u.pieces() && now < t; ++k) {
    const double next = std::min(u.breakpoints[static_cast<std::size_t>(k) + 1], t);
    process(u.values.row(k).transpose(), next - now);
    now = next;
  }
  if (now < t) process(u.tail, t - now);
  if (t == 0.0 && sup) return x0.norm();
  return sup ? acc : std::pow(acc, 1.0 / q);
}

Trajectory apply_A_phi(const System& sys, const GridSignal& u, std::vector<double> grid) {
  if (!sys.stable()) throw std::domain_error("apply_A_phi: generator is not stable");
  Trajectory tr = trajectory(sys, VectorXd::Zero(sys.modes()), u, std::move(grid));
  const VectorXd rates = sys.gen.rates();
  for (Index k = 0; k < tr.states.cols(); ++k) tr.states.col(k) = -(rates.cwiseProduct(tr.states.col(k)));
  return tr;
}

IndicatorInputMap input_map_indicator(const Generator& gen, double tau) {
  if (!(tau > 0.0) || tau > 1.0) throw std::invalid_argument("input_map_indicator: tau must lie in (0,1]");
  if (gen.shift() != 0.0) throw std::invalid_argument("input_map_indicator: generator must be unshifted");
  for (Index i = 0; i < gen.modes(); ++i)
    if (std::abs(gen.eigenvalue(i) - double(i + 1)) > 1e-12 * double(i + 1))
      throw std::invalid_argument("input_map_indicator: requires lambda_n = n");
  const Index N = gen.modes();
  IndicatorInputMap out;
  out.state = VectorXd::Zero(N);
  for (Index i = 0; i < N; ++i) {
    const double n = double(i + 1);
    const double a = 0.5 / n, b = std::min(1.0 / n, tau);
    if (a >= tau) continue;
    // -n int_a^b e^{-n(tau-s)} ds
    out.state(i) = -(std::exp(-n * (tau - b)) - std::exp(-n * (tau - a)));
  }
  out.norm_squared = out.state.squaredNorm();
  const double c = std::pow(std::numbers::e - std::exp(0.5), 2.0);
  const double n0 = std::ceil(1.0 / tau - 1e-12);
  const double q = std::exp(-2.0 * tau);
  out.lower_bound_full = c * std::exp(-2.0 * tau * n0) / (1.0 - q);
  if (n0 <= double(N)) out.lower_bound = out.lower_bound_full * (1.0 - std::pow(q, double(N) - n0 + 1.0));
  return out;
}

}  // namespace isslab
