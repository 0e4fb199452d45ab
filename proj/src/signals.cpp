#include "isslab/signals.hpp"

#include "isslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isslab {

namespace {

void validate_exponent(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("L^p exponent must satisfy p >= 1 (got " + std::to_string(p) + ")");
}

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

GridSignal::GridSignal(std::vector<double> bp, MatrixXd vals, VectorXd tl)
    : breakpoints(std::move(bp)), values(std::move(vals)), tail(std::move(tl)) {
  if (breakpoints.size() < 2) throw std::invalid_argument("GridSignal needs at least one piece");
  if (breakpoints.front() != 0.0) throw std::invalid_argument("GridSignal must start at t=0");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    if (!(breakpoints[k] > breakpoints[k - 1]) || !std::isfinite(breakpoints[k]))
      throw std::invalid_argument("GridSignal breakpoints must be finite and strictly increasing");
  if (static_cast<std::size_t>(values.rows()) + 1 != breakpoints.size())
    throw std::invalid_argument("GridSignal needs one value row per piece");
  if (tail.size() != values.cols()) throw std::invalid_argument("GridSignal tail dimension mismatch");
  if (!values.allFinite() || !tail.allFinite()) throw std::invalid_argument("GridSignal values must be finite");
}

GridSignal::GridSignal(std::vector<double> bp, MatrixXd vals)
    : GridSignal(std::move(bp), vals, VectorXd::Zero(vals.cols())) {}

GridSignal GridSignal::constant(const VectorXd& value, double horizon) {
  MatrixXd v(1, value.size());
  v.row(0) = value.transpose();
  return GridSignal({0.0, horizon}, v);
}

GridSignal GridSignal::scalar_constant(double value, double horizon) {
  return constant(VectorXd::Constant(1, value), horizon);
}

GridSignal GridSignal::zero(Index dim, double horizon) { return constant(VectorXd::Zero(dim), horizon); }

VectorXd GridSignal::value_at(double t) const {
  if (t < 0.0) throw std::invalid_argument("GridSignal::value_at: negative time");
  if (t >= end()) return tail;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return values.row(std::distance(breakpoints.begin(), it) - 1).transpose();
}

GridSignal GridSignal::scaled(double factor) const { return {breakpoints, values * factor, tail * factor}; }

GridSignal GridSignal::truncated(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("GridSignal::truncated: window must be positive");
  std::vector<double> bp{0.0};
  std::vector<Index> rows;
  for (Index k = 0; k < pieces() && breakpoints[k] < t; ++k) {
    bp.push_back(std::min(breakpoints[k + 1], t));
    rows.push_back(k);
  }
  MatrixXd v(static_cast<Index>(rows.size()), dim());
  for (std::size_t i = 0; i < rows.size(); ++i) v.row(i) = values.row(rows[i]);
  if (bp.back() < t) {  // window extends into the tail
    bp.push_back(t);
    v.conservativeResize(v.rows() + 1, Eigen::NoChange);
    v.row(v.rows() - 1) = tail.transpose();
  }
  return {bp, v};
}

GridSignal GridSignal::shifted(double shift) const {
  if (shift < 0.0) throw std::invalid_argument("GridSignal::shifted: negative shift");
  if (shift >= end()) {
    MatrixXd v(1, dim());
    v.row(0) = tail.transpose();
    return {{0.0, 1.0}, v, tail};
  }
  std::vector<double> bp{0.0};
  std::vector<Index> rows;
  for (Index k = 0; k < pieces(); ++k) {
    if (breakpoints[k + 1] <= shift) continue;
    bp.push_back(breakpoints[k + 1] - shift);
    rows.push_back(k);
  }
  MatrixXd v(static_cast<Index>(rows.size()), dim());
  for (std::size_t i = 0; i < rows.size(); ++i) v.row(i) = values.row(rows[i]);
  return {bp, v, tail};
}

Index AnalyticSignal::dim() const {
  if (const auto* ind = std::get_if<IntervalIndicatorPerMode>(&family)) return ind->modes;
  return 1;
}

VectorXd AnalyticSignal::value(double t) const {
  if (t < 0.0) throw std::invalid_argument("AnalyticSignal::value: negative time");
  if (t > horizon) return VectorXd::Zero(dim());
  return std::visit(
      [&](const auto& f) -> VectorXd {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PowerDecay>) {
          return VectorXd::Constant(1, std::pow(1.0 + t, -f.theta));
        } else if constexpr (std::is_same_v<F, ConstantLevel>) {
          return VectorXd::Constant(1, f.value);
        } else {
          VectorXd v = VectorXd::Zero(f.modes);
          for (Index n = 1; n <= f.modes; ++n)
            if (t >= 0.5 / double(n) && t <= 1.0 / double(n)) v(n - 1) = 1.0;
          return v;
        }
      },
      family);
}

double AnalyticSignal::pointwise_norm(double t) const { return value(t).norm(); }

double default_power_decay_theta(double p) {
  validate_exponent(p);
  return 0.5 * (1.0 + 1.0 / p);
}

double lp_norm(const GridSignal& u, double p, double t) {
  validate_exponent(p);
  if (t < 0.0) throw std::invalid_argument("lp_norm: negative window");
  if (t == 0.0) return 0.0;
  const bool sup = std::isinf(p);
  double acc = 0.0;
  for (Index k = 0; k < u.pieces(); ++k) {
    const double a = u.breakpoints[k];
    if (a >= t) break;
    const double len = std::min(u.breakpoints[k + 1], t) - a;
    const double mag = u.values.row(k).norm();
    if (sup) acc = std::max(acc, mag);
    else acc += std::pow(mag, p) * len;
  }
  if (t > u.end()) {
    const double mag = u.tail.norm();
    if (sup) acc = std::max(acc, mag);
    else if (mag > 0.0) acc += std::isinf(t) ? kInf : std::pow(mag, p) * (t - u.end());
  }
  return sup ? acc : std::pow(acc, 1.0 / p);
}

double lp_norm(const AnalyticSignal& u, double p, double t) {
  validate_exponent(p);
  if (t < 0.0) throw std::invalid_argument("lp_norm: negative window");
  const double w = std::min(t, u.horizon);
  if (w == 0.0) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ConstantLevel>) {
          if (std::isinf(p)) return std::abs(f.value);
          if (f.value == 0.0) return 0.0;
          return std::abs(f.value) * std::pow(w, 1.0 / p);
        } else if constexpr (std::is_same_v<F, PowerDecay>) {
          if (std::isinf(p)) return 1.0;
          // Substituting s = e^v - 1 gives a smooth exponential integrand.
          const double k = f.theta * p - 1.0;
          auto integrand = [k](double v) { return std::exp(-k * v); };
          if (std::isinf(w)) {
            if (k <= 0.0) return kInf;
            const double vmax = std::log(1e14) / k;
            const double head = integrate(integrand, 0.0, vmax, 1e-13).value;
            return std::pow(head + std::exp(-k * vmax) / k, 1.0 / p);
          }
          return std::pow(integrate(integrand, 0.0, std::log1p(w), 1e-13).value, 1.0 / p);
        } else {
          // Supported in [0,1].
          const double support = std::min(w, 1.0);
          return lp_norm(discretize(u, 1.0, support), p, support);
        }
      },
      u.family);
}

GridSignal discretize(const AnalyticSignal& u, double step, double horizon) {
  const double h = std::min(horizon, u.horizon);
  if (!(step > 0.0)) throw std::invalid_argument("discretize: step must be positive");
  if (!(h > 0.0) || std::isinf(h)) throw std::invalid_argument("discretize: horizon must be finite and positive");
  std::vector<double> bp{0.0};
  if (const auto* ind = std::get_if<IntervalIndicatorPerMode>(&u.family)) {
    for (Index n = 1; n <= ind->modes; ++n) {
      for (double c : {0.5 / double(n), 1.0 / double(n)})
        if (c < h) bp.push_back(c);
    }
    bp.push_back(h);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  } else if (std::holds_alternative<ConstantLevel>(u.family)) {
    bp.push_back(h);
  } else {
    const auto pieces = static_cast<long>(std::ceil(h / step - 1e-12));
    for (long k = 1; k < pieces; ++k) bp.push_back(double(k) * step);
    bp.push_back(h);
  }
  MatrixXd values(static_cast<Index>(bp.size()) - 1, u.dim());
  for (Index k = 0; k + 1 < static_cast<Index>(bp.size()); ++k)
    values.row(k) = u.value(0.5 * (bp[k] + bp[k + 1])).transpose();
  return {bp, values};
}

UniformStream::UniformStream(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) s = splitmix64(x);
}

double UniformStream::next() {
  // xoshiro256**
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return double(result >> 11) * 0x1.0p-53;
}

double UniformStream::normal() {
  const double u1 = 1.0 - next();
  const double u2 = next();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

VectorXd UniformStream::unit_vector(Index dim) {
  VectorXd v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v(i) = normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

std::vector<GridSignal> random_probe_family(std::uint64_t seed, int count, const ProbeShape& shape, double p) {
  validate_exponent(p);
  if (count < 1) throw std::invalid_argument("random_probe_family: count must be at least 1");
  if (!(shape.horizon > 0.0) || std::isinf(shape.horizon))
    throw std::invalid_argument("random_probe_family: horizon must be finite and positive");
  if (shape.dim < 1 || shape.pieces < 1) throw std::invalid_argument("random_probe_family: bad shape");
  UniformStream rng(seed);
  const double T = shape.horizon;
  const int K = shape.pieces;
  std::vector<GridSignal> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    GridSignal u;
    switch (static_cast<ProbeKind>(i % 3)) {
      case ProbeKind::RandomPattern: {
        std::vector<double> bp(static_cast<std::size_t>(K) + 1);
        for (int k = 0; k <= K; ++k) bp[static_cast<std::size_t>(k)] = T * double(k) / double(K);
        MatrixXd v(K, shape.dim);
        for (int k = 0; k < K; ++k)
          for (Index j = 0; j < shape.dim; ++j) v(k, j) = (rng.next() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
        u = GridSignal(bp, v);
        break;
      }
      case ProbeKind::Bump: {
        const double width = T * std::pow(2.0, -rng.uniform(0.0, 6.0));
        const double start = rng.uniform(0.0, T - width);
        const VectorXd dir = rng.unit_vector(shape.dim);
        std::vector<double> bp{0.0};
        MatrixXd v(0, shape.dim);
        auto push = [&](double end, const VectorXd& val) {
          bp.push_back(end);
          v.conservativeResize(v.rows() + 1, Eigen::NoChange);
          v.row(v.rows() - 1) = val.transpose();
        };
        if (start > 0.0) push(start, VectorXd::Zero(shape.dim));
        push(start + width, dir);
        if (start + width < T) push(T, VectorXd::Zero(shape.dim));
        u = GridSignal(bp, v);
        break;
      }
      case ProbeKind::Chirp: {
        // Breakpoints T * ratio^{K-k}, refining geometrically towards t = 0.
        const double ratio = rng.uniform(0.3, 0.7);
        std::vector<double> bp{0.0};
        for (int k = 1; k <= K; ++k) bp.push_back(T * std::pow(ratio, K - k));
        const VectorXd dir = rng.unit_vector(shape.dim);
        MatrixXd v(K, shape.dim);
        for (int k = 0; k < K; ++k) v.row(k) = ((k % 2 == 0) ? 1.0 : -1.0) * dir.transpose();
        u = GridSignal(bp, v);
        break;
      }
    }
    out.push_back(u.scaled(1.0 / lp_norm(u, p, T)));
  }
  return out;
}

}  // namespace isslab
