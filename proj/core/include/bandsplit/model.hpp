#pragma once

// Analytic delay model for one tagged queue split across M bands. Each band
// is an M/G/1 queue with vacations; the split objective is the
// arrival-weighted mean of the per-band sojourn times.

#include <cstdint>
#include <span>
#include <vector>

namespace bandsplit {

inline constexpr int kNumAccessCategories = 4;

// Queue Q_{i,k}: traffic for station `sta` in access category `ac`.
struct FlowKey {
  std::uint32_t sta = 0;
  std::uint32_t ac = 0;

  friend bool operator==(const FlowKey&, const FlowKey&) = default;
  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

bool valid_flow_key(const FlowKey& key, std::uint32_t num_stas);

// Measured per-(band, flow) moments. Mean service time is 1/mu and is not
// stored. A band that never takes vacations is encoded as vbar == v2 == 0.
struct BandStats {
  double mu = 0.0;    // service rate, packets/s
  double x2 = 0.0;    // E[X^2], s^2
  double vbar = 0.0;  // E[V], s
  double v2 = 0.0;    // E[V^2], s^2

  friend bool operator==(const BandStats&, const BandStats&) = default;

  bool vacation_free() const { return vbar == 0.0 && v2 == 0.0; }
  // Mean residual vacation V2/(2V); zero when vacation_free().
  double residual_vacation() const;
};

// Throws Error(kInvalidStats) if the moment invariants do not hold.
void validate(const BandStats& stats);

struct DelayBreakdown {
  double waiting = 0.0;
  double service = 0.0;
  double total = 0.0;
};

struct RateAllocation {
  std::vector<double> lambdas;

  double total() const;
  std::size_t size() const { return lambdas.size(); }
};

struct TrafficSpec {
  double lambda_total = 0.0;
  FlowKey flow;
};

// Relative tolerance used for the sum constraint sum(lambda_j) == lambda.
inline constexpr double kSumTolerance = 1e-9;
// Per-band utilisation at or above this is treated as unstable by the
// optimizer and the simulator.
inline constexpr double kDefaultStabilityMargin = 0.999;

// Pollaczek-Khinchine waiting time of a vacation-free M/G/1 queue.
double pk_waiting(double lambda, double mu, double x2);

// Mean waiting, service and sojourn time of one band at arrival rate
// `lambda_j`. lambda_j == 0 is accepted (vacation term only).
DelayBreakdown band_delay(double lambda_j, const BandStats& stats);

// Arrival-weighted mean sojourn time over all bands. Zero-rate bands are
// allowed and carry zero weight.
double aggregate_delay(const RateAllocation& alloc, std::span<const BandStats> stats);

// Per-band term T_j(lambda_j) * lambda_j / lambda_total of the objective.
double objective_term(double lambda_j, double lambda_total, const BandStats& stats);

// Strict feasibility: sum matches, every rate positive and below mu.
bool feasible(const RateAllocation& alloc, std::span<const BandStats> stats, double lambda_total);

// Same as `feasible` but tolerates bands carrying exactly zero rate, which is
// how the optimizer reports bands dropped from the active set.
bool feasible_on_support(const RateAllocation& alloc, std::span<const BandStats> stats,
                         double lambda_total);

}  // namespace bandsplit
