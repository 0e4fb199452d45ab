#pragma once

// Estimates of admissibility constants
//   c(t) = sup ||Phi_. u||_{L^q([0,t],X)} / ||u||_{L^p([0,t],U)}
// and verdicts on whether they stay bounded as t grows.

#include "isslab/signals.hpp"
#include "isslab/system.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace isslab {

enum class Strategy { Auto, PowerIteration, ProbeFamily };

/// Consistent: plateau ratio <= kPlateauRatio. Divergent: growth across the
/// ladder >= kDivergenceFactor. Anything between is Inconclusive.
enum class Verdict { Consistent, Inconclusive, Divergent };

inline constexpr double kPlateauRatio = 1.05;
inline constexpr double kDivergenceFactor = 2.0;

std::string to_string(Strategy s);
/// "infinite-time-consistent" / "finite-time" / "divergent".
std::string admissibility_verdict_name(Verdict v);

struct ProbeOptions {
  int count{100};
  int pieces{16};
  /// Extra candidates (counterexample inputs), discretized on each window.
  std::vector<AnalyticSignal> extra;
  /// Power-iteration steps per unit time (at least min_steps overall).
  double steps_per_unit{16.0};
  int min_steps{64};
  double tolerance{1e-8};
  int max_iterations{20000};
};

struct PowerIterationResult {
  double sigma{0};
  int iterations{0};
  double residual{0};
  bool converged{false};
  int steps{0};
};

/// Norm of the discretized map u -> Phi_. u from L^2([0,t],U) to
/// L^2([0,t],X) over inputs constant on `steps` uniform pieces. The output
/// norm is exact (closed-form Gram per piece); the adjoint is the exact
/// transpose of the assembled recursion.
PowerIterationResult input_map_operator_norm(const System& sys, double t, int steps, std::uint64_t seed,
                                             double tolerance = 1e-8, int max_iterations = 20000);

/// Forward and transpose application of the discretized operator, exposed
/// for adjoint-consistency checks. w is steps x input_dim, y is steps x 2N.
MatrixXd discretized_input_map(const System& sys, double t, int steps, const MatrixXd& w);
MatrixXd discretized_input_map_transpose(const System& sys, double t, int steps, const MatrixXd& y);

struct ProbeSweep {
  std::vector<double> ratios;
  std::vector<std::string> labels;
  double best{0};
  std::string best_label;
};

/// Ratios ||Phi_. u||_{L^q([0,t])} / ||u||_{L^p([0,t])} over the seeded probe
/// family plus structured candidates (constant, early bump, opts.extra).
ProbeSweep probe_sweep(const System& sys, double p, double q, double t, std::uint64_t seed,
                       const ProbeOptions& opts = {});

/// Lower estimate of c(t). Auto picks PowerIteration for p = q = 2.
double admissibility_constant(const System& sys, double p, double q, double t, Strategy strategy,
                              std::uint64_t seed, const ProbeOptions& opts = {});

struct AdmissibilityReport {
  double p{2}, q{2};
  std::vector<double> horizons;
  std::vector<double> c_estimates;
  Strategy method{Strategy::ProbeFamily};
  double plateau_ratio{0};
  double growth{0};
  double exponent{0};  // least-squares slope of log c against log t
  Verdict verdict{Verdict::Inconclusive};
};

/// c(t) along a geometric horizon ladder (>= 4 entries). Estimates are made
/// nondecreasing by a running maximum, since an input on [0,t] extended by
/// zero is admissible on every longer window.
AdmissibilityReport infinite_time_probe(const System& sys, double p, double q, const std::vector<double>& horizons,
                                        std::uint64_t seed, const ProbeOptions& opts = {},
                                        Strategy strategy = Strategy::Auto);

/// Verdict from a ladder of nondecreasing estimates.
Verdict ladder_verdict(const std::vector<double>& estimates, double* plateau = nullptr, double* growth = nullptr);

/// Ratios for one fixed input over growing windows, e.g. the L^p \ L^1 input
/// that breaks infinite-time L^p-L^1 admissibility of the scalar system.
struct FixedInputSweep {
  std::vector<double> horizons;
  std::vector<double> state_norms;
  std::vector<double> input_norms;
  std::vector<double> ratios;
  double exponent{0};
  Verdict verdict{Verdict::Inconclusive};
};
FixedInputSweep fixed_input_sweep(const System& sys, const AnalyticSignal& u, double p, double q,
                                  const std::vector<double>& horizons, double step);

/// M (omega r)^{-1/r} ||B|| with 1/r = 1 - (1/p - 1/q); r = inf gives M ||B||.
double young_bound(const System& sys, double p, double q, double M, double omega);

/// sup ||A Phi_. u||_{L^p} / ||u||_{L^p}, i.e. L^p-L^p admissibility of (A, A B).
AdmissibilityReport maximal_regularity_probe(const System& sys, double p, const std::vector<double>& horizons,
                                             std::uint64_t seed, const ProbeOptions& opts = {});

struct PairClassification {
  double p{2}, q{2};
  AdmissibilityReport infinite_time;
  /// Estimates at a fixed window under mode refinement (empty when no
  /// system family was supplied).
  std::vector<Index> truncation_modes;
  std::vector<double> truncation_estimates;
  Verdict finite_time{Verdict::Consistent};
  Verdict infinite{Verdict::Consistent};
};

struct ArrowCheck {
  std::string description;
  bool satisfied{true};
};

struct ClassificationTable {
  std::vector<PairClassification> pairs;
  std::vector<ArrowCheck> arrows;
  bool consistent() const;
};

struct ClassifyOptions {
  ProbeOptions probes;
  /// Builds the same system with a given number of modes; enables the
  /// finite-time verdict by truncation refinement at window `refinement_window`.
  std::function<System(Index)> family;
  std::vector<Index> mode_ladder;
  double refinement_window{1.0};
  /// Builds the counterexample inputs for a given number of modes.
  std::function<std::vector<AnalyticSignal>(Index)> extra_for_modes;
};

ClassificationTable classify_admissibility(const System& sys, const std::vector<std::pair<double, double>>& pairs,
                                           const std::vector<double>& horizons, std::uint64_t seed,
                                           const ClassifyOptions& opts = {});

}  // namespace isslab
