#pragma once

// Lyapunov function candidates for diagonal systems, Dini derivatives along
// mild solutions, and sampled checks of the dissipation inequality
//   dV/dt(x; u) <= -a3 ||x||^q + a4 ||u(0)||^q.

#include "isslab/signals.hpp"
#include "isslab/system.hpp"

#include <functional>
#include <string>
#include <vector>

namespace isslab {

enum class Construction { SupExp, DiagQuadratic, HeatKernel, IntegralHomogeneous };
std::string to_string(Construction c);

enum class HeatRoute { Spectral, Kernel };

/// V(x) = sup_{t>=0} e^{lambda t} ||T(t)x||, lambda in (0, lambda_1 - shift).
double v_sup(const Generator& gen, double lambda, const VectorXd& x);

/// V(x) = sum x_n^2 / lambda_n (unshifted eigenvalues).
SeriesValue<double> v_diag(const Generator& gen, const VectorXd& x);

/// V(x) = -<A^{-1}x, x> for the Dirichlet heat generator mu_n = a pi^2 n^2.
/// The kernel route evaluates the Green's function form
///   (2/a) int_0^1 (1-xi) x(xi) int_0^xi tau x(tau) dtau dxi
/// with x(xi) = sum x_n sqrt(2) sin(n pi xi), by Gauss-Legendre on cells of
/// width `cell`.
double v_heat(const Generator& gen, const VectorXd& x, HeatRoute route, double cell = 1e-3);

/// V(x) = int_0^inf ||T(t)x||^n dt by adaptive quadrature with analytic tail.
double v_integral_n(const Generator& gen, int n, const VectorXd& x);

/// A Lyapunov candidate bundled with its homogeneity degree and coercivity
/// constants c_lo ||x||^q <= V(x) <= c_hi ||x||^q (c_lo = 0: non-coercive).
struct LyapunovFunction {
  Construction construction{Construction::DiagQuadratic};
  double degree{2};
  double c_lo{0};
  double c_hi{0};
  bool quadrature{false};  // evaluated by numerical quadrature
  int n{0};                // IntegralHomogeneous only
  std::function<double(const VectorXd&)> value;
  /// Closed-form Lie derivative when available: (x, u0) -> dV/dt.
  std::function<double(const VectorXd&, const VectorXd&)> lie;
};

LyapunovFunction make_v_sup(const System& sys, double lambda);
LyapunovFunction make_v_diag(const System& sys);
LyapunovFunction make_v_heat(const System& sys, HeatRoute route = HeatRoute::Spectral);
/// Rejects n * alpha >= 1 for the system's control regularity.
LyapunovFunction make_v_integral_n(const System& sys, int n);

struct DiniSchedule {
  double h0{1e-3};
  int j_min{0};
  int j_max{16};
  int tail{4};
};

struct DiniResult {
  double value{0};  // max of the last `tail` quotients
  std::vector<double> steps;
  std::vector<double> quotients;
};

/// Difference quotients (V(phi(h,x,u)) - V(x))/h along h_j = h0 2^{-j}.
DiniResult dini_lie_derivative(const LyapunovFunction& V, const System& sys, const VectorXd& x, const GridSignal& u,
                               const DiniSchedule& schedule = {});

/// Closed forms: v_diag, and v_integral_n with n = 2 (V = sum x^2/(2 r)).
double lie_derivative_v_diag(const System& sys, const VectorXd& x, const VectorXd& u0);
double lie_derivative_v_integral2(const System& sys, const VectorXd& x, const VectorXd& u0);

struct LyapunovCertificate {
  Construction construction{Construction::DiagQuadratic};
  double degree{2};
  double q{2};
  double c_lo{0};
  double c_hi{0};
  double a3{0};
  double a4{0};
  bool success{false};
  int samples{0};
  double max_derivative_at_zero_input{0};  // max dV/dt / ||x||^q over u = 0 samples
  std::string message;
};

/// Grid search a3, a4 in {2^k : k = -10..10}: among the pairs that no sample
/// violates by more than 1e-6, the one with the smallest a4/a3 (ties go to
/// the larger a3). Fails when no feasible pair has a3 >= 1e-3.
LyapunovCertificate check_dissipation(const LyapunovFunction& V, const System& sys, double q, int sample_count,
                                      std::uint64_t seed, const DiniSchedule& schedule = {});

struct HomogeneityCheck {
  double max_violation{0};
  double tolerance{0};
  bool passed{false};
};
HomogeneityCheck check_homogeneity(const LyapunovFunction& V, double degree, int samples, std::uint64_t seed, Index modes);

struct LemmaBoundsReport {
  double alpha{0};
  double omega{0};
  double C_empirical{0};    // smallest C making the smoothing bound hold on the grid
  double C_operator{0};     // sup_t t^alpha e^{omega t} ||T(t) A^alpha|| on the grid
  bool smoothing_holds{false};
  bool limit_holds{false};  // limsup_h ||T(t)Phi_h u||/h bound with C_empirical
  std::vector<double> steps;
  std::vector<double> limit_errors;  // ||A^{-alpha}Phi_h u/h - A^{-alpha}Bu(0)||
  double limit_order{0};             // fitted slope of log error against log h
  bool limit_converges{false};       // errors non-increasing as h decreases, with a net drop
};

/// Checks, for u = u0 constant, the smoothing estimate
///   ||T(t)Phi_h u|| <= C t^{-alpha} e^{-omega t} ||A^{-alpha}Phi_h u||,
/// its h -> 0 version and A^{-alpha}Phi_h u/h -> A^{-alpha}Bu0. omega is
/// lambda_1 for bounded B and lambda_1/2 otherwise.
LemmaBoundsReport lemma_bounds_check(const System& sys, const VectorXd& u0, const std::vector<double>& steps,
                                     const std::vector<double>& times);

}  // namespace isslab
