#pragma once

// Linear ISS estimates ||phi(., x, u)||_{L^q} <= M ||x|| + G ||u||_{L^p} and
// exponential-stability diagnostics.

#include "isslab/admissibility.hpp"

#include <optional>

namespace isslab {

enum class IssVerdict { Consistent, Inconclusive, NotIss };

/// "ISS-consistent" / "inconclusive" / "not-ISS".
std::string iss_verdict_name(IssVerdict v);

struct StabilityCheck {
  double q{2};
  double horizon{0};
  double omega_fit{0};       // least-squares decay rate of ||T(t)x||
  double datko_integral{0};  // int_0^horizon ||T(t)x||^q dt
  double tail_bound{0};      // bound on int_horizon^inf, inf when unstable
  double half_horizon_integral{0};
  double growth{0};          // datko_integral / half_horizon_integral
  bool stable{false};
};

/// Datko-Pazy diagnostic for the probe x (default e_1, the slowest mode).
/// Stable iff omega_fit > 0 and the tail bound is below 1% of the integral.
StabilityCheck exponential_stability_check(const Generator& gen, double q, double horizon,
                                           const std::optional<VectorXd>& x = std::nullopt);

struct IssOptions {
  ProbeOptions probes;
  int state_probes{16};
  int combined_probes{16};
};

struct IssGainReport {
  double p{2}, q{2};
  std::vector<double> horizons;
  std::vector<double> M_estimates;
  std::vector<double> G_estimates;
  double M{0};
  double G{0};
  double decay_rate{0};  // a in M e^{-a t}; p_infty_bridge only
  int probe_count{0};
  double worst_ratio{0};      // max (||phi||_{L^q} - M||x||) / ||u||_{L^p}
  double worst_violation{0};  // p_infty_bridge: max of ||phi(t)|| - envelope(t)
  double M_plateau{0};
  double G_plateau{0};
  AdmissibilityReport admissibility;
  std::optional<StabilityCheck> datko;
  IssVerdict verdict{IssVerdict::Inconclusive};
};

/// Fits M from free-motion probes and G from the admissibility estimate on
/// each horizon. Unstable systems are reported not-ISS with Datko evidence.
IssGainReport iss_gain_fit(const System& sys, double p, double q, const std::vector<double>& horizons,
                           std::uint64_t seed, const IssOptions& opts = {});

/// Pointwise envelope ||phi(t,x,u)|| <= M||x||e^{-at} + G||u||_{L^p([0,t])},
/// checked on sampled trajectories up to the largest horizon. Requires B
/// bounded or p > 1/(1 - alpha).
IssGainReport p_infty_bridge(const System& sys, double p, const std::vector<double>& horizons, std::uint64_t seed,
                             const IssOptions& opts = {});

}  // namespace isslab
