#pragma once

// Mild solutions phi(t, x0, u) = T(t)x0 + Phi_t u for piecewise-constant
// inputs, integrated exactly per mode and per constant piece.

#include "isslab/signals.hpp"
#include "isslab/system.hpp"

#include <vector>

namespace isslab {

/// (1 - e^{-r dt}) / r, with the series dt - r dt^2/2 when |r dt| < 1e-8.
double integrator_factor(double rate, double dt);

/// One exact update over [0, dt] with constant input value u.
VectorXd step(const System& sys, const VectorXd& x, const VectorXd& u, double dt, bool* used_series = nullptr);

struct StepInfo {
  double start{0};
  double end{0};
  bool series_branch{false};
};

struct Trajectory {
  std::vector<double> times;
  MatrixXd states;  // modes x times.size()
  GridSignal input;
  std::vector<StepInfo> steps;

  VectorXd state(std::size_t k) const { return states.col(static_cast<Index>(k)); }
  VectorXd final_state() const { return states.col(states.cols() - 1); }
  VectorXd norms() const;
};

/// States at every output time, merged with the input breakpoints that fall
/// inside the grid. times[0] is 0 and states.col(0) is x0.
Trajectory trajectory(const System& sys, const VectorXd& x0, const GridSignal& u, std::vector<double> output_grid);

/// Uniform grid of step dt up to t_final; with geometric_levels > 0 the
/// points t_final 2^{-j}, j = 1..levels, are added to resolve t -> 0.
std::vector<double> make_output_grid(double t_final, double dt, int geometric_levels = 0);

/// phi(t, x0, u) without recording intermediate states.
VectorXd mild_solution(const System& sys, const VectorXd& x0, const GridSignal& u, double t);

/// Phi_t u.
VectorXd input_map(const System& sys, const GridSignal& u, double t);

/// ||phi(., x0, u)||_{L^q([0,t], X)}. q = 2 uses closed-form Gram integrals
/// per piece; finite q != 2 uses adaptive quadrature split at the stiff
/// layers; q = inf maximises over each piece.
double state_lq_norm(const System& sys, const VectorXd& x0, const GridSignal& u, double q, double t);

/// Per-mode integrals over one piece of length dt with start state x and
/// forcing v = Bu: returns int_0^dt x_n(s)^2 ds for every mode.
VectorXd piece_square_integrals(const VectorXd& rates, const VectorXd& x, const VectorXd& v, double dt);

/// Gram entries (int e^{-2rs}, int e^{-rs} phi(r,s), int phi(r,s)^2) over [0,dt].
struct PieceGram {
  double xx, xv, vv;
};
PieceGram piece_gram(double rate, double dt);

/// A Phi_t u = -(lambda_n - shift)(Phi_t u)_n along the grid.
Trajectory apply_A_phi(const System& sys, const GridSignal& u, std::vector<double> output_grid);

struct IndicatorInputMap {
  VectorXd state;            // exact truncated Phi_tau u
  double norm_squared{0};
  double lower_bound{0};     // (e - e^{1/2})^2 sum_{n=ceil(1/tau)}^{N} e^{-2 n tau}
  double lower_bound_full{0};  // same sum to infinity
};

/// Phi_tau u for B = A_{-1} (b_n = -lambda_n) and the per-mode indicator
/// input (u(s))_n = 1 on [1/(2n), 1/n]. Requires lambda_n = n and tau in (0,1].
IndicatorInputMap input_map_indicator(const Generator& gen, double tau);

}  // namespace isslab
