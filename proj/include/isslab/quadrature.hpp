#pragma once

#include <functional>
#include <span>

namespace isslab {

struct QuadratureResult {
  double value{0};
  double error{0};
  int evaluations{0};
};

/// Adaptive Gauss-Kronrod (7/15) on [a,b]. Subdivides until the Kronrod error
/// estimate of every panel sums below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, double abs_tol = 0.0, int max_depth = 60);

/// Same, after splitting [a,b] at the given interior points (discontinuities,
/// kinks or stiff layers). Points outside (a,b) are ignored.
QuadratureResult integrate_split(const std::function<double(double)>& f, double a, double b,
                                 std::span<const double> points, double rel_tol = 1e-12,
                                 double abs_tol = 0.0);

/// Gauss-Legendre nodes/weights on [-1,1] for 1 <= n <= 5.
struct GaussRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace isslab
