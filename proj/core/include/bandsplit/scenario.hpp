#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bandsplit/distribution.hpp"
#include "bandsplit/model.hpp"
#include "bandsplit/scheduler.hpp"

namespace bandsplit {

struct BandConfig {
  std::string name;
  DistributionSpec service;
  double prop_latency_s = 0.0;

  friend bool operator==(const BandConfig&, const BandConfig&) = default;
};

struct FlowConfig {
  FlowKey key;
  double lambda = 0.0;          // packets/s, Poisson
  std::uint64_t packets = 0;    // packets generated by this flow
  std::vector<bool> bands;      // availability mask; empty means every band

  friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

enum class VacationMode {
  // Vacations arise from serving other queues on the same band.
  kEmergent,
  // The band takes i.i.d. vacations whenever it finds every queue empty.
  kParametric,
};

std::string_view to_string(VacationMode mode);
VacationMode vacation_mode_from_string(std::string_view name);

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<BandConfig> bands;
  std::uint32_t stas = 1;
  // Access categories from highest to lowest priority.
  std::vector<std::uint32_t> ac_priority = {3, 2, 0, 1};
  std::vector<FlowConfig> flows;
  std::vector<SchedulerSpec> schedulers = {{SchedulerKind::kLeakyBucket, 0}};
  VacationMode vacation_mode = VacationMode::kEmergent;
  DistributionSpec vacation = DistributionSpec::deterministic(0.01);
  std::uint64_t feedback_interval = 100;
  double warmup_frac = 0.1;
  std::uint64_t seed_base = 1;
  std::uint32_t replications = 10;
  std::uint64_t queue_cap = 1'000'000;
  std::uint64_t estimator_window = 1000;
  std::uint64_t min_samples = 30;
  TokenIncrement token_increment = TokenIncrement::kShare;
  std::uint64_t batch_size = 100;
  double max_sim_time_s = 0.0;  // 0 disables the limit
  double stability_margin = kDefaultStabilityMargin;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  std::size_t num_bands() const { return bands.size(); }
  AvailabilityMask mask_for(std::size_t flow) const;
};

// Throws Error(kConfigInvalid) naming the offending field.
void validate(const ScenarioConfig& config);

// Stats a scheduler starts from before any feedback arrives: analytic
// moments of the configured service (and, in parametric mode, vacation)
// distributions.
std::vector<BandStats> nominal_stats(const ScenarioConfig& config);

struct MetricsReport {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t queued = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t measured = 0;
  double goodput_pps = 0.0;
  double mean_latency_s = 0.0;    // created -> released
  double p95_latency_s = 0.0;
  double mean_reseq_delay_s = 0.0;
  double max_reseq_delay_s = 0.0;
  double out_of_order_frac = 0.0;
  std::vector<double> per_band_frac;
  std::vector<double> per_band_mean_delay;  // created -> received at receiver
  double mean_wait_s = 0.0;       // created -> service start
  double mean_sojourn_s = 0.0;    // created -> service end
  double sim_time_s = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

}  // namespace bandsplit
