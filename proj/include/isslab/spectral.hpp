#pragma once

// Diagonal generators on truncated l^2 state spaces.
//
// A acts as A e_n = -(lambda_n - shift) e_n on the first N basis vectors. All
// operators here (semigroup, fractional powers, extrapolation norms) are
// diagonal in that basis, so every function is a per-mode formula.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace isslab {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;
using VectorXd = Eigen::VectorXd;

/// A truncated series value together with a bound on the omitted tail.
template <typename Scalar = double>
struct SeriesValue {
  Scalar value{0};
  Scalar tail_bound{0};
};

enum class EigenRule { Explicit, Linear, Quadratic };

enum class PowerSign { Positive, Negative };

template <typename Scalar = double>
class DiagonalGenerator {
 public:
  DiagonalGenerator() = default;

  explicit DiagonalGenerator(Vec<Scalar> eigenvalues, Scalar shift = Scalar(0))
      : eigenvalues_(std::move(eigenvalues)), shift_(shift) {
    validate();
  }

  /// lambda_n = slope * n + offset, n = 1..modes.
  static DiagonalGenerator linear(Index modes, Scalar slope, Scalar offset = Scalar(0),
                                  Scalar shift = Scalar(0)) {
    return from_rule(EigenRule::Linear, modes, slope, offset, shift);
  }

  /// lambda_n = scale * n^2 + offset, n = 1..modes.
  static DiagonalGenerator quadratic(Index modes, Scalar scale, Scalar offset = Scalar(0),
                                     Scalar shift = Scalar(0)) {
    return from_rule(EigenRule::Quadratic, modes, scale, offset, shift);
  }

  Index modes() const { return eigenvalues_.size(); }
  const Vec<Scalar>& eigenvalues() const { return eigenvalues_; }
  Scalar eigenvalue(Index i) const { return eigenvalues_(i); }
  Scalar shift() const { return shift_; }
  EigenRule rule() const { return rule_; }
  Scalar rule_scale() const { return rule_scale_; }
  Scalar rule_offset() const { return rule_offset_; }

  /// Effective decay rates lambda_n - shift.
  Vec<Scalar> rates() const { return eigenvalues_.array() - shift_; }
  Scalar rate(Index i) const { return eigenvalues_(i) - shift_; }

  DiagonalGenerator with_shift(Scalar shift) const {
    if (!std::isfinite(double(shift))) throw std::invalid_argument("shift must be finite");
    DiagonalGenerator out = *this;
    out.shift_ = shift;
    return out;
  }

  Scalar growth_bound() const { return -(eigenvalues_(0) - shift_); }
  bool stable() const { return eigenvalues_(0) - shift_ > Scalar(0); }

  /// Largest c with lambda_n >= c n on the retained modes; used for
  /// geometric tail bounds of series indexed beyond the truncation.
  Scalar growth_constant() const {
    Scalar c = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < modes(); ++i) c = std::min(c, eigenvalues_(i) / Scalar(i + 1));
    return c;
  }

 private:
  static DiagonalGenerator from_rule(EigenRule rule, Index modes, Scalar scale, Scalar offset,
                                     Scalar shift) {
    if (modes < 1) throw std::invalid_argument("generator needs at least one mode");
    Vec<Scalar> ev(modes);
    for (Index i = 0; i < modes; ++i) {
      const Scalar n = Scalar(i + 1);
      ev(i) = (rule == EigenRule::Linear ? scale * n : scale * n * n) + offset;
    }
    DiagonalGenerator g(std::move(ev), shift);
    g.rule_ = rule;
    g.rule_scale_ = scale;
    g.rule_offset_ = offset;
    return g;
  }

  void validate() const {
    if (eigenvalues_.size() < 1) throw std::invalid_argument("generator needs at least one mode");
    for (Index i = 0; i < eigenvalues_.size(); ++i) {
      if (!(eigenvalues_(i) > Scalar(0)) || !std::isfinite(double(eigenvalues_(i))))
        throw std::invalid_argument("eigenvalues must be finite and positive");
      if (i > 0 && !(eigenvalues_(i) > eigenvalues_(i - 1)))
        throw std::invalid_argument("eigenvalues must be strictly increasing");
    }
    if (!std::isfinite(double(shift_))) throw std::invalid_argument("shift must be finite");
  }

  Vec<Scalar> eigenvalues_;
  Scalar shift_{0};
  EigenRule rule_{EigenRule::Explicit};
  Scalar rule_scale_{0};
  Scalar rule_offset_{0};
};

using Generator = DiagonalGenerator<double>;

namespace detail {

template <typename Scalar>
void require_dims(const DiagonalGenerator<Scalar>& gen, const Vec<Scalar>& x) {
  if (x.size() != gen.modes())
    throw std::invalid_argument("state has " + std::to_string(x.size()) +
                                " coefficients but generator has " + std::to_string(gen.modes()) +
                                " modes");
}

template <typename Scalar>
void require_invertible(const DiagonalGenerator<Scalar>& gen, const char* what) {
  if (!gen.stable())
    throw std::domain_error(std::string(what) +
                            ": generator has a nonpositive effective eigenvalue (lambda_1 - shift = " +
                            std::to_string(double(-gen.growth_bound())) + "), 0 is not in the resolvent set");
}

}  // namespace detail

/// T(t)x, per mode exp(-(lambda_n - shift) t) x_n.
template <typename Scalar>
Vec<Scalar> semigroup_apply(const DiagonalGenerator<Scalar>& gen, Scalar t, const Vec<Scalar>& x) {
  if (t < Scalar(0)) throw std::invalid_argument("semigroup_apply: negative time");
  detail::require_dims(gen, x);
  return (x.array() * (-gen.rates().array() * t).exp()).matrix();
}

/// A^{+alpha} x or A^{-alpha} x with A the positive operator diag(lambda_n - shift).
template <typename Scalar>
Vec<Scalar> fractional_power_apply(const DiagonalGenerator<Scalar>& gen, Scalar alpha, PowerSign sign,
                                   const Vec<Scalar>& x) {
  detail::require_dims(gen, x);
  detail::require_invertible(gen, "fractional_power_apply");
  if (alpha == Scalar(0)) return x;
  const Scalar e = sign == PowerSign::Positive ? alpha : -alpha;
  return (x.array() * gen.rates().array().pow(e)).matrix();
}

/// ||x||_{-alpha} = ||A^{-alpha} x||, resolvent point fixed at 0.
template <typename Scalar>
Scalar extrapolation_norm(const DiagonalGenerator<Scalar>& gen, const Vec<Scalar>& x, Scalar alpha) {
  if (alpha < Scalar(0) || alpha > Scalar(1))
    throw std::invalid_argument("extrapolation_norm: alpha must lie in [0,1]");
  detail::require_invertible(gen, "extrapolation_norm");
  return fractional_power_apply(gen, alpha, PowerSign::Negative, x).norm();
}

/// Generator of T(t)e^{omega t}: the spectrum moves by omega, the rule is kept.
template <typename Scalar>
DiagonalGenerator<Scalar> shift_generator(const DiagonalGenerator<Scalar>& gen, Scalar omega) {
  return gen.with_shift(gen.shift() + omega);
}

/// ||T(t) A^alpha|| = max_n r_n^alpha exp(-r_n t) over the retained modes.
///
/// The tail bound is zero when the maximizer of r^alpha e^{-rt} (r = alpha/t)
/// lies below the last retained rate, since the function decreases beyond it;
/// otherwise it is the global supremum (alpha/(e t))^alpha.
template <typename Scalar>
SeriesValue<Scalar> semigroup_power_norm(const DiagonalGenerator<Scalar>& gen, Scalar alpha, Scalar t) {
  if (alpha < Scalar(0) || alpha >= Scalar(1))
    throw std::invalid_argument("semigroup_power_norm: alpha must lie in [0,1)");
  if (t < Scalar(0)) throw std::invalid_argument("semigroup_power_norm: negative time");
  detail::require_invertible(gen, "semigroup_power_norm");
  if (t == Scalar(0)) {
    if (alpha > Scalar(0)) return {std::numeric_limits<Scalar>::infinity(), Scalar(0)};
    return {Scalar(1), Scalar(0)};
  }
  const Vec<Scalar> r = gen.rates();
  Scalar best = Scalar(0);
  for (Index i = 0; i < r.size(); ++i) best = std::max(best, std::pow(r(i), alpha) * std::exp(-r(i) * t));
  Scalar tail = Scalar(0);
  if (alpha > Scalar(0) && alpha / t > r(r.size() - 1))
    tail = std::pow(alpha / (std::exp(Scalar(1)) * t), alpha);
  return {best, tail};
}

enum class ControlKind { RankOne, DiagonalMultiplier };

/// B in L(U, X_{-alpha}). Rank-one maps a scalar input onto the profile b;
/// a diagonal multiplier takes an input in U = l^2 and scales it per mode.
template <typename Scalar = double>
class ControlOperator {
 public:
  ControlOperator() = default;
  ControlOperator(ControlKind kind, Vec<Scalar> b, Scalar alpha)
      : kind_(kind), b_(std::move(b)), alpha_(alpha) {
    if (alpha_ < Scalar(0) || alpha_ > Scalar(1))
      throw std::invalid_argument("control regularity alpha must lie in [0,1]");
    for (Index i = 0; i < b_.size(); ++i)
      if (!std::isfinite(double(b_(i)))) throw std::invalid_argument("control coefficients must be finite");
  }

  static ControlOperator rank_one(Vec<Scalar> b, Scalar alpha = Scalar(0)) {
    return {ControlKind::RankOne, std::move(b), alpha};
  }
  static ControlOperator multiplier(Vec<Scalar> b, Scalar alpha = Scalar(0)) {
    return {ControlKind::DiagonalMultiplier, std::move(b), alpha};
  }

  ControlKind kind() const { return kind_; }
  const Vec<Scalar>& coefficients() const { return b_; }
  Scalar alpha() const { return alpha_; }
  Index modes() const { return b_.size(); }
  Index input_dim() const { return kind_ == ControlKind::RankOne ? Index(1) : b_.size(); }
  bool is_zero() const { return b_.size() == 0 || b_.cwiseAbs().maxCoeff() == Scalar(0); }

  /// B u for a single input value.
  Vec<Scalar> apply(const Vec<Scalar>& u) const {
    if (u.size() != input_dim()) throw std::invalid_argument("control input has wrong dimension");
    if (kind_ == ControlKind::RankOne) return b_ * u(0);
    return b_.cwiseProduct(u);
  }

  /// Operator norm as a map U -> X on the retained modes.
  Scalar norm() const {
    if (b_.size() == 0) return Scalar(0);
    return kind_ == ControlKind::RankOne ? b_.norm() : b_.cwiseAbs().maxCoeff();
  }

  /// Same operator with coefficients replaced; used for A B and A^{-alpha} B.
  ControlOperator with_coefficients(Vec<Scalar> b, Scalar alpha) const { return {kind_, std::move(b), alpha}; }

 private:
  ControlKind kind_{ControlKind::RankOne};
  Vec<Scalar> b_;
  Scalar alpha_{0};
};

using Control = ControlOperator<double>;

/// ||A^{-alpha} B|| with a tail estimate fitted from the decay of modes N/4..N.
/// For a rank-one B the terms are (b_n/r_n^alpha)^2 and must decay faster than
/// 1/n; for a multiplier sup |b_n|/r_n^alpha must not grow. Throws
/// std::domain_error when the declared alpha is too small. Below 32 modes no
/// decay law is inferred and only the finite sum is returned.
template <typename Scalar>
SeriesValue<Scalar> control_regularity_norm(const DiagonalGenerator<Scalar>& gen, const ControlOperator<Scalar>& B) {
  if (B.modes() != gen.modes()) throw std::invalid_argument("control operator and generator disagree on mode count");
  detail::require_invertible(gen, "control_regularity_norm");
  const Vec<Scalar> r = gen.rates();
  const Index n = gen.modes();
  Vec<Scalar> scaled = (B.coefficients().array() * r.array().pow(-B.alpha())).matrix();

  // Upper envelopes, so sign changes and scattered small coefficients do not
  // distort the fit: sup_{k>=i} |terms_k| for decay, sup_{k<=i} for growth.
  auto envelope = [&](const Vec<Scalar>& terms, bool from_tail) {
    Vec<Scalar> e(n);
    Scalar run = 0;
    for (Index j = 0; j < n; ++j) {
      const Index i = from_tail ? n - 1 - j : j;
      e(i) = run = std::max(run, Scalar(std::abs(terms(i))));
    }
    return e;
  };

  // Power-law exponent of the envelope over modes N/4..N.
  auto fitted_exponent = [&](const Vec<Scalar>& raw, bool from_tail) -> Scalar {
    const Vec<Scalar> terms = envelope(raw, from_tail);
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (Index i = n / 4; i < n; ++i) {
      const Scalar v = terms(i);
      if (v == Scalar(0)) continue;
      const Scalar lx = std::log(Scalar(i + 1)), ly = std::log(v);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
      ++m;
    }
    if (m < 2) return -std::numeric_limits<Scalar>::infinity();
    const Scalar den = m * sxx - sx * sx;
    if (den <= Scalar(0)) return Scalar(0);
    return (m * sxy - sx * sy) / den;
  };

  constexpr Index kMinModesForFit = 32;
  if (B.kind() == ControlKind::RankOne) {
    const Vec<Scalar> terms = scaled.array().square().matrix();
    const Scalar value = std::sqrt(terms.sum());
    if (n < kMinModesForFit || B.is_zero()) return {value, Scalar(0)};
    const Scalar s = fitted_exponent(terms, true);
    if (!(s < Scalar(-1) - Scalar(1e-3)))
      throw std::domain_error("control profile is not bounded into X_{-alpha}: terms of ||A^{-alpha}b||^2 decay like n^" +
                              std::to_string(double(s)));
    // Integral tail: sum_{k>N} c k^s <= c N^{s+1}/(-s-1) with c fitted at N.
    const Scalar last = envelope(terms, true)(n - 1);
    const Scalar c = last / std::pow(Scalar(n), s);
    const Scalar tail_sq = c * std::pow(Scalar(n), s + 1) / (-s - 1);
    return {value, std::sqrt(value * value + tail_sq) - value};
  }
  const Scalar value = scaled.cwiseAbs().maxCoeff();
  if (n < kMinModesForFit || B.is_zero()) return {value, Scalar(0)};
  const Scalar s = fitted_exponent(scaled, false);
  if (s > Scalar(1e-6))
    throw std::domain_error("multiplier is not bounded into X_{-alpha}: |b_n|/r_n^alpha grows like n^" +
                            std::to_string(double(s)));
  return {value, Scalar(0)};
}

}  // namespace isslab
