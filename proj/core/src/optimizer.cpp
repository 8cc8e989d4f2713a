#include "bandsplit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bandsplit/error.hpp"

namespace bandsplit {

namespace {

std::vector<double> service_rates(std::span<const BandStats> stats) {
  std::vector<double> mus;
  mus.reserve(stats.size());
  for (const auto& s : stats) mus.push_back(s.mu);
  return mus;
}

void check_instance(double lambda_total, std::span<const BandStats> stats, const OptimizerConfig& cfg) {
  if (stats.empty()) {
    throw Error(ErrorCode::kLengthMismatch, "no bands given");
  }
  for (const auto& s : stats) validate(s);
  if (!(lambda_total > 0.0) || !std::isfinite(lambda_total)) {
    throw Error(ErrorCode::kInfeasible, "total arrival rate must be positive");
  }
  const double capacity = std::accumulate(stats.begin(), stats.end(), 0.0,
                                          [](double acc, const BandStats& s) { return acc + s.mu; });
  if (lambda_total >= cfg.stability_margin * capacity) {
    std::ostringstream os;
    os << "offered load " << lambda_total << " exceeds " << cfg.stability_margin
       << " of total capacity " << capacity;
    throw Error(ErrorCode::kOverload, os.str());
  }
}

// d F / d lambda_j, with F normalised by lambda_total.
double marginal_cost(double lambda_j, double lambda_total, const BandStats& s) {
  const double slack = s.mu - lambda_j;
  const double queueing = 0.5 * s.x2 * s.mu * (s.mu * s.mu / (slack * slack) - 1.0);
  return (queueing + s.residual_vacation() + 1.0 / s.mu) / lambda_total;
}

LagrangeSolution finish(double lambda_total, std::span<const BandStats> stats, std::vector<double> rates,
                        double gamma, std::vector<int> branch, SolveMethod method) {
  LagrangeSolution sol;
  sol.alloc.lambdas = std::move(rates);
  sol.objective = aggregate_delay(sol.alloc, stats);
  sol.gamma = gamma;
  sol.branch = std::move(branch);
  sol.method = method;
  (void)lambda_total;
  return sol;
}

LagrangeSolution single_band(double lambda_total, std::span<const BandStats> stats, SolveMethod method) {
  const double gamma = marginal_cost(lambda_total, lambda_total, stats[0]);
  return finish(lambda_total, stats, {lambda_total}, gamma, {-1}, method);
}

// Apply the closing residual of the bisection to the largest active band so
// the sum constraint holds to rounding.
void close_sum(std::vector<double>& rates, double lambda_total) {
  const double residual = lambda_total - std::accumulate(rates.begin(), rates.end(), 0.0);
  auto it = std::max_element(rates.begin(), rates.end());
  *it += residual;
}

}  // namespace

std::string_view to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::kClosedFormApprox: return "closed_form_approx";
    case SolveMethod::kNumericGamma: return "numeric_gamma";
    case SolveMethod::kGridFallback: return "grid_fallback";
  }
  return "unknown";
}

void validate(const OptimizerConfig& cfg) {
  if (cfg.grid_resolution < 64 || !(cfg.gamma_bracket_lo > 0.0) || cfg.max_bracket_doublings <= 0 ||
      !(cfg.tolerance > 0.0) || !(cfg.approx_threshold > 0.0) || !(cfg.stability_margin > 0.0) ||
      cfg.stability_margin > 1.0) {
    throw Error(ErrorCode::kConfigInvalid, "optimizer configuration out of range");
  }
}

double gamma_approx(double lambda_total, std::span<const double> mus) {
  if (mus.empty()) throw Error(ErrorCode::kLengthMismatch, "no bands given");
  double capacity = 0.0;
  double weighted = 0.0;
  for (double mu : mus) {
    if (!(mu > 0.0)) throw Error(ErrorCode::kInvalidStats, "service rate must be positive");
    capacity += mu;
    weighted += mu * std::sqrt(mu);
  }
  if (!(lambda_total > 0.0)) throw Error(ErrorCode::kInfeasible, "total arrival rate must be positive");
  if (lambda_total >= capacity) {
    throw Error(ErrorCode::kOverload, "offered load reaches total service capacity");
  }
  const double spare = capacity - lambda_total;
  return weighted * weighted / (2.0 * lambda_total * spare * spare);
}

std::vector<double> lambda_star_given_gamma(double gamma, std::span<const BandStats> stats,
                                            double lambda_total, std::span<const int> branch) {
  if (branch.size() != stats.size()) {
    throw Error(ErrorCode::kLengthMismatch, "branch and stats lengths differ");
  }
  std::vector<double> rates(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const auto& s = stats[j];
    // Radicand divided through by vbar, so it also covers vacation-free bands.
    const double radicand = s.mu * s.mu * s.x2 - 2.0 * s.mu * s.residual_vacation() +
                            2.0 * lambda_total * gamma * s.mu - 2.0;
    if (!(radicand > 0.0)) {
      std::ostringstream os;
      os << "radicand " << radicand << " for band " << j;
      throw Error(ErrorCode::kBranchInvalid, os.str());
    }
    const double offset = s.mu * s.mu * std::sqrt(s.x2) / std::sqrt(radicand);
    rates[j] = branch[j] < 0 ? s.mu - offset : s.mu + offset;
  }
  return rates;
}

double clamped_rate(double gamma, const BandStats& s, double lambda_total) {
  // The minus root is positive exactly when the marginal cost of an empty
  // band is below lambda * gamma.
  const double empty_cost = s.residual_vacation() + 1.0 / s.mu;
  if (lambda_total * gamma <= empty_cost) return 0.0;
  const double radicand = s.mu * s.mu * s.x2 - 2.0 * s.mu * s.residual_vacation() +
                          2.0 * lambda_total * gamma * s.mu - 2.0;
  const double rate = s.mu - s.mu * s.mu * std::sqrt(s.x2) / std::sqrt(radicand);
  return std::max(rate, 0.0);
}

LagrangeSolution solve_numeric(double lambda_total, std::span<const BandStats> stats,
                               const OptimizerConfig& cfg) {
  validate(cfg);
  check_instance(lambda_total, stats, cfg);
  if (stats.size() == 1) return single_band(lambda_total, stats, SolveMethod::kNumericGamma);

  auto excess = [&](double gamma) {
    double sum = 0.0;
    for (const auto& s : stats) sum += clamped_rate(gamma, s, lambda_total);
    return sum - lambda_total;
  };

  const auto mus = service_rates(stats);
  double hi = gamma_approx(lambda_total, mus);
  int doublings = 0;
  while (excess(hi) < 0.0) {
    if (++doublings > cfg.max_bracket_doublings) {
      throw Error(ErrorCode::kBracketFailure, "no sign change above the approximate multiplier");
    }
    hi *= 2.0;
  }
  double lo = cfg.gamma_bracket_lo;
  if (lo >= hi || excess(lo) > 0.0) {
    throw Error(ErrorCode::kBracketFailure, "lower bracket already over-allocates");
  }

  // Each clamped rate is non-decreasing in gamma, so the excess is too.
  for (int iter = 0; iter < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++iter) {
    const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  std::vector<double> rates(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) rates[j] = clamped_rate(hi, stats[j], lambda_total);
  close_sum(rates, lambda_total);
  for (std::size_t j = 0; j < stats.size(); ++j) {
    if (rates[j] < 0.0 || rates[j] >= stats[j].mu) {
      throw Error(ErrorCode::kBracketFailure, "root left the feasible region");
    }
  }
  return finish(lambda_total, stats, std::move(rates), hi, std::vector<int>(stats.size(), -1),
                SolveMethod::kNumericGamma);
}

LagrangeSolution solve_grid(double lambda_total, std::span<const BandStats> stats,
                            const OptimizerConfig& cfg) {
  validate(cfg);
  if (stats.size() > kMaxGridDimension) {
    throw Error(ErrorCode::kDimensionTooLarge, "grid oracle supports at most 4 bands");
  }
  check_instance(lambda_total, stats, cfg);
  if (stats.size() == 1) return single_band(lambda_total, stats, SolveMethod::kGridFallback);

  const std::size_t m = stats.size();
  const std::size_t dims = m - 1;
  const auto res = static_cast<std::size_t>(cfg.grid_resolution);

  std::vector<double> upper(dims), lo(dims), hi(dims);
  for (std::size_t i = 0; i < dims; ++i) {
    upper[i] = std::min(lambda_total, stats[i].mu);
    lo[i] = 0.0;
    hi[i] = upper[i];
  }

  std::vector<double> point(m), best_point;
  double best = std::numeric_limits<double>::infinity();
  RateAllocation scratch;
  scratch.lambdas.resize(m);

  std::vector<std::size_t> odometer(dims);
  for (int level = 0; level < 80; ++level) {
    std::vector<double> step(dims);
    double widest = 0.0;
    for (std::size_t i = 0; i < dims; ++i) {
      step[i] = (hi[i] - lo[i]) / static_cast<double>(res - 1);
      widest = std::max(widest, step[i]);
    }
    std::fill(odometer.begin(), odometer.end(), 0);
    for (;;) {
      double used = 0.0;
      for (std::size_t i = 0; i < dims; ++i) {
        point[i] = lo[i] + step[i] * static_cast<double>(odometer[i]);
        used += point[i];
      }
      point[m - 1] = lambda_total - used;
      bool ok = point[m - 1] >= 0.0;
      for (std::size_t j = 0; ok && j < m; ++j) ok = point[j] < stats[j].mu;
      if (ok) {
        scratch.lambdas = point;
        const double f = aggregate_delay(scratch, stats);
        if (f < best) {
          best = f;
          best_point = point;
        }
      }
      std::size_t k = 0;
      while (k < dims && ++odometer[k] == res) odometer[k++] = 0;
      if (k == dims) break;
    }
    if (best_point.empty()) {
      throw Error(ErrorCode::kNoFeasibleBranch, "grid found no feasible allocation");
    }
    if (widest <= cfg.tolerance * lambda_total) break;
    for (std::size_t i = 0; i < dims; ++i) {
      lo[i] = std::max(0.0, best_point[i] - 2.0 * step[i]);
      hi[i] = std::min(upper[i], best_point[i] + 2.0 * step[i]);
    }
  }

  double gamma = 0.0;
  int active = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (best_point[j] > 0.0) {
      gamma += marginal_cost(best_point[j], lambda_total, stats[j]);
      ++active;
    }
  }
  return finish(lambda_total, stats, std::move(best_point), gamma / std::max(active, 1),
                std::vector<int>(m, -1), SolveMethod::kGridFallback);
}

LagrangeSolution solve_closed_form(double lambda_total, std::span<const BandStats> stats,
                                   const OptimizerConfig& cfg) {
  validate(cfg);
  check_instance(lambda_total, stats, cfg);
  if (stats.size() == 1) return single_band(lambda_total, stats, SolveMethod::kClosedFormApprox);

  auto fallback = [&]() {
    try {
      return solve_numeric(lambda_total, stats, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBracketFailure || stats.size() > kMaxGridDimension) throw;
      return solve_grid(lambda_total, stats, cfg);
    }
  };

  const auto mus = service_rates(stats);
  const double mu_max = *std::max_element(mus.begin(), mus.end());
  if (2.0 * lambda_total < cfg.approx_threshold * mu_max || stats.size() > kMaxBranchEnumeration) {
    return fallback();
  }

  const double gamma = gamma_approx(lambda_total, mus);
  const std::size_t m = stats.size();
  std::vector<int> branch(m);
  // Lexicographic order with -1 < +1: the all-minus branch comes first.
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
    for (std::size_t j = 0; j < m; ++j) branch[j] = ((code >> (m - 1 - j)) & 1U) ? +1 : -1;
    std::vector<double> rates;
    try {
      rates = lambda_star_given_gamma(gamma, stats, lambda_total, branch);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBranchInvalid) continue;
      throw;
    }
    RateAllocation candidate{rates};
    if (feasible(candidate, stats, lambda_total)) {
      return finish(lambda_total, stats, std::move(rates), gamma, branch, SolveMethod::kClosedFormApprox);
    }
  }
  return fallback();
}

}  // namespace bandsplit
