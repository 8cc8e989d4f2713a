#include "bandsplit/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "bandsplit/error.hpp"

namespace bandsplit {

namespace {

// Moments computed from the same samples can undershoot the Jensen bound by
// a few ulps.
constexpr double kMomentSlack = 1e-9;

std::string describe(const BandStats& s) {
  std::ostringstream os;
  os << "{mu=" << s.mu << ", x2=" << s.x2 << ", vbar=" << s.vbar << ", v2=" << s.v2 << "}";
  return os.str();
}

bool sum_matches(double sum, double target) {
  return std::abs(sum - target) <= kSumTolerance * std::max(std::abs(target), 1e-300);
}

}  // namespace

bool valid_flow_key(const FlowKey& key, std::uint32_t num_stas) {
  return key.sta < num_stas && key.ac < static_cast<std::uint32_t>(kNumAccessCategories);
}

double BandStats::residual_vacation() const {
  return vacation_free() ? 0.0 : v2 / (2.0 * vbar);
}

void validate(const BandStats& s) {
  const bool finite = std::isfinite(s.mu) && std::isfinite(s.x2) && std::isfinite(s.vbar) &&
                      std::isfinite(s.v2);
  if (!finite || s.mu <= 0.0) {
    throw Error(ErrorCode::kInvalidStats, "service rate must be finite and positive " + describe(s));
  }
  const double mean_sq = 1.0 / (s.mu * s.mu);
  if (s.x2 < mean_sq * (1.0 - kMomentSlack)) {
    throw Error(ErrorCode::kInvalidStats, "x2 below (1/mu)^2 " + describe(s));
  }
  if (s.vacation_free()) return;
  if (s.vbar <= 0.0) {
    throw Error(ErrorCode::kInvalidStats, "vbar must be positive " + describe(s));
  }
  if (s.v2 < s.vbar * s.vbar * (1.0 - kMomentSlack)) {
    throw Error(ErrorCode::kInvalidStats, "v2 below vbar^2 " + describe(s));
  }
}

double RateAllocation::total() const {
  return std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
}

double pk_waiting(double lambda, double mu, double x2) {
  return lambda * x2 / (2.0 * (1.0 - lambda / mu));
}

DelayBreakdown band_delay(double lambda_j, const BandStats& stats) {
  validate(stats);
  if (!(lambda_j >= 0.0)) {
    throw Error(ErrorCode::kInfeasible, "negative arrival rate");
  }
  if (lambda_j >= stats.mu) {
    std::ostringstream os;
    os << "arrival rate " << lambda_j << " >= service rate " << stats.mu;
    throw Error(ErrorCode::kInfeasible, os.str());
  }
  DelayBreakdown d;
  d.waiting = pk_waiting(lambda_j, stats.mu, stats.x2) + stats.residual_vacation();
  d.service = 1.0 / stats.mu;
  d.total = d.waiting + d.service;
  return d;
}

double objective_term(double lambda_j, double lambda_total, const BandStats& stats) {
  return band_delay(lambda_j, stats).total * lambda_j / lambda_total;
}

double aggregate_delay(const RateAllocation& alloc, std::span<const BandStats> stats) {
  if (alloc.size() != stats.size()) {
    throw Error(ErrorCode::kLengthMismatch, "allocation and stats lengths differ");
  }
  const double lambda = alloc.total();
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kInfeasible, "allocation carries no traffic");
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    weighted += band_delay(alloc.lambdas[j], stats[j]).total * alloc.lambdas[j];
  }
  return weighted / lambda;
}

bool feasible(const RateAllocation& alloc, std::span<const BandStats> stats, double lambda_total) {
  if (alloc.size() != stats.size() || alloc.size() == 0) return false;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double l = alloc.lambdas[j];
    if (!(l > 0.0) || !(l < stats[j].mu)) return false;
  }
  return sum_matches(alloc.total(), lambda_total);
}

bool feasible_on_support(const RateAllocation& alloc, std::span<const BandStats> stats,
                         double lambda_total) {
  if (alloc.size() != stats.size() || alloc.size() == 0) return false;
  bool any = false;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double l = alloc.lambdas[j];
    if (l == 0.0) continue;
    if (!(l > 0.0) || !(l < stats[j].mu)) return false;
    any = true;
  }
  return any && sum_matches(alloc.total(), lambda_total);
}

}  // namespace bandsplit
