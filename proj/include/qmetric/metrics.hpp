#pragma once

// Coefficient metrics on the state space and the enclosure of Connes' metric
//
//   d_inf(phi, psi) = sup_{g != e} |c_g| / L(g)
//   d_2(phi, psi)   = (sum_{g != e} |c_g|^2 / L(g)^2)^{1/2},   c_g = phi(lambda_g) - psi(lambda_g)
//
// with d_inf <= d <= d_2. Connes' d is only ever reported as that bracket,
// optionally with a non-certified spectral point estimate.

#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "qmetric/states.hpp"

namespace qmetric {

struct MetricBracket {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();  // +inf when no finite bound is known
  int ball_radius = 0;
  std::optional<double> tail_bound;
  nlohmann::json diagnostics = nlohmann::json::object();

  bool hi_finite() const noexcept { return hi < std::numeric_limits<double>::infinity(); }
};

/// c_g for every ball position; c_e is always 0.
std::vector<cplx> delta_coeffs(const StateRep& phi, const StateRep& psi, const Ball& ball);

MetricBracket d_inf(const StateRep& phi, const StateRep& psi, const Ball& ball);
MetricBracket d_2(const StateRep& phi, const StateRep& psi, const Ball& ball, const GrowthReport& growth);
/// [d_inf.lo, d_2.hi], a certified enclosure of d whenever hi is finite.
MetricBracket connes_bracket(const StateRep& phi, const StateRep& psi, const Ball& ball,
                             const GrowthReport& growth);

struct HeuristicOptions {
  double rel_improvement = 1e-8;
  int max_iter = 500;
  int restarts = 4;
  NormOptions norm{1e-9, 10000, NormMethod::lanczos};
};

struct HeuristicResult {
  double estimate = 0.0;
  double sigma_drift = 0.0;  // estimate minus the ratio re-evaluated on ball(2R)
  bool converged = true;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Ratio ascent on |sum_g alpha_g c_g| / ||P_R [D, a] P_R|| over a supported in
/// ball(support_radius), truncated to ball(trunc_radius). The result is a point
/// estimate of d, not a certified value.
HeuristicResult connes_heuristic(const StateRep& phi, const StateRep& psi, const Group& group,
                                 int support_radius, int trunc_radius, const HeuristicOptions& opts = {});

}  // namespace qmetric
