#pragma once

// Optimal split of one arrival stream across bands: minimise the
// arrival-weighted mean sojourn time subject to sum(lambda_j) == lambda and
// 0 < lambda_j < mu_j.
//
// Three routes are provided:
//  * solve_closed_form: the large-load approximation of the Lagrange
//    multiplier plugged into the stationarity root, with sign-branch
//    enumeration. Falls through to solve_numeric when the approximation is
//    not trusted or no branch is feasible.
//  * solve_numeric: exact stationarity root with the multiplier found by
//    bisection; bands whose root would be negative drop out of the active set.
//  * solve_grid: refining simplex grid search, used as a verification oracle.

#include <span>
#include <string_view>
#include <vector>

#include "bandsplit/model.hpp"

namespace bandsplit {

enum class SolveMethod { kClosedFormApprox, kNumericGamma, kGridFallback };

std::string_view to_string(SolveMethod method);

struct OptimizerConfig {
  int grid_resolution = 64;
  double gamma_bracket_lo = 1e-12;
  int max_bracket_doublings = 60;
  double tolerance = 1e-12;
  // Trust the approximate multiplier only when 2*lambda >= threshold * max mu.
  double approx_threshold = 10.0;
  double stability_margin = kDefaultStabilityMargin;
};

void validate(const OptimizerConfig& cfg);

struct LagrangeSolution {
  double gamma = 0.0;
  RateAllocation alloc;
  double objective = 0.0;
  std::vector<int> branch;  // -1 / +1 per band
  SolveMethod method = SolveMethod::kNumericGamma;
};

// Approximate multiplier for uniform sign choice, valid when 2*lambda >> mu_j.
// Throws kOverload when lambda_total >= sum(mu).
double gamma_approx(double lambda_total, std::span<const double> mus);

// Stationarity root for a given multiplier and sign branch. Throws
// kBranchInvalid when a radicand is non-positive.
std::vector<double> lambda_star_given_gamma(double gamma, std::span<const BandStats> stats,
                                            double lambda_total, std::span<const int> branch);

// Minus-branch root clamped at zero: the per-band rate that equalises the
// marginal cost with gamma, or zero if the band is too expensive even empty.
double clamped_rate(double gamma, const BandStats& stats, double lambda_total);

LagrangeSolution solve_closed_form(double lambda_total, std::span<const BandStats> stats,
                                   const OptimizerConfig& cfg = {});
LagrangeSolution solve_numeric(double lambda_total, std::span<const BandStats> stats,
                               const OptimizerConfig& cfg = {});
LagrangeSolution solve_grid(double lambda_total, std::span<const BandStats> stats,
                            const OptimizerConfig& cfg = {});

inline constexpr std::size_t kMaxGridDimension = 4;
inline constexpr std::size_t kMaxBranchEnumeration = 20;

}  // namespace bandsplit
