#pragma once

// Input signals u : [0, inf) -> U and their L^p([0,t], U) norms.

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <variant>
#include <vector>

namespace isslab {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Right-continuous piecewise-constant signal. Piece k covers
/// [breakpoints[k], breakpoints[k+1]) with value values.row(k); after the last
/// breakpoint the signal equals `tail`.
struct GridSignal {
  std::vector<double> breakpoints;
  MatrixXd values;  // pieces x dim
  VectorXd tail;    // dim

  GridSignal() = default;
  GridSignal(std::vector<double> breakpoints, MatrixXd values, VectorXd tail);
  GridSignal(std::vector<double> breakpoints, MatrixXd values);

  static GridSignal constant(const VectorXd& value, double horizon);
  static GridSignal scalar_constant(double value, double horizon);
  static GridSignal zero(Index dim, double horizon);

  Index dim() const { return values.cols(); }
  Index pieces() const { return values.rows(); }
  double end() const { return breakpoints.back(); }
  VectorXd value_at(double t) const;

  GridSignal scaled(double factor) const;
  /// u on [0,t] followed by zero (tail dropped).
  GridSignal truncated(double t) const;
  /// s -> u(s + shift), restarted at time 0.
  GridSignal shifted(double shift) const;
};

struct PowerDecay {
  double theta;  // u(t) = (1+t)^{-theta}
};
/// (u(s))_n = 1 on [1/(2n), 1/n], n = 1..modes.
struct IntervalIndicatorPerMode {
  Index modes;
};
struct ConstantLevel {
  double value;
};

struct AnalyticSignal {
  std::variant<PowerDecay, IntervalIndicatorPerMode, ConstantLevel> family;
  double horizon{kInf};  // zero beyond the horizon

  Index dim() const;
  VectorXd value(double t) const;
  /// ||u(t)||_U
  double pointwise_norm(double t) const;
};

/// Default decay exponent for an L^p \ L^1 representative: middle of (1/p, 1).
double default_power_decay_theta(double p);

/// ||u||_{L^p([0,t],U)}; p may be kInf. Exact per piece.
double lp_norm(const GridSignal& u, double p, double t);
/// Closed form for constants, adaptive quadrature for power decay, exact
/// piece sums for the per-mode indicator. t may be kInf.
double lp_norm(const AnalyticSignal& u, double p, double t);

/// Midpoint-sampled piecewise-constant approximant on [0, horizon]. Indicator
/// signals use their exact breakpoints 1/(2n), 1/n instead of the step.
GridSignal discretize(const AnalyticSignal& u, double step, double horizon);

struct ProbeShape {
  double horizon{1.0};
  Index dim{1};
  int pieces{16};
};

enum class ProbeKind { RandomPattern, Bump, Chirp };

/// Deterministic family of unit-L^p inputs on [0, horizon]; kinds cycle
/// random patterns, single bumps and geometric chirps.
std::vector<GridSignal> random_probe_family(std::uint64_t seed, int count, const ProbeShape& shape, double p);

/// Uniform [0,1) from a 64-bit engine, identical on every platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }
  /// Uniform direction on the unit sphere of R^dim (Box-Muller normals).
  VectorXd unit_vector(Index dim);
  double normal();

 private:
  std::uint64_t state_[4];
};

}  // namespace isslab
