#pragma once

// Replications of a scenario across schedulers and seeds, and paired-seed
// comparison of the resulting records.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bandsplit/records.hpp"
#include "bandsplit/scenario.hpp"

namespace bandsplit {

struct SuiteOptions {
  std::optional<std::uint32_t> seeds;  // overrides config.replications
  unsigned jobs = 1;
};

// One record per (scheduler, seed) in config order, seeds ascending from
// seed_base. The result does not depend on `jobs`.
std::vector<RunRecord> run_suite(const ScenarioConfig& config, const SuiteOptions& options = {});

struct MetricDelta {
  std::string metric;
  double baseline_mean = 0.0;
  double scheme_mean = 0.0;
  double mean_delta = 0.0;   // scheme - baseline, averaged over paired seeds
  std::size_t lower = 0;     // seeds where the scheme is strictly below baseline
  std::size_t higher = 0;
  std::size_t ties = 0;
};

struct SchemeComparison {
  std::string scenario;
  std::string scheme;
  std::string baseline;
  std::size_t seeds = 0;
  std::vector<MetricDelta> deltas;
};

struct ComparisonSummary {
  std::vector<SchemeComparison> rows;
  std::vector<std::string> violations;
};

// Metrics compared, in output order.
std::vector<std::string> compared_metrics();

// Throws kMismatchedSeeds if a scenario has fewer than two schedulers, lacks
// the baseline, or a scheduler's seed set differs from the baseline's.
ComparisonSummary compare(std::span<const RunRecord> records, std::string_view baseline);

std::string format_summary(const ComparisonSummary& summary);

}  // namespace bandsplit
