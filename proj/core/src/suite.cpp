#include "bandsplit/suite.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bandsplit/error.hpp"
#include "bandsplit/simulator.hpp"

namespace bandsplit {

namespace {

double metric_value(const MetricsReport& m, std::string_view metric) {
  if (metric == "goodput_pps") return m.goodput_pps;
  if (metric == "mean_latency_s") return m.mean_latency_s;
  if (metric == "p95_latency_s") return m.p95_latency_s;
  if (metric == "mean_reseq_delay_s") return m.mean_reseq_delay_s;
  if (metric == "max_reseq_delay_s") return m.max_reseq_delay_s;
  if (metric == "out_of_order_frac") return m.out_of_order_frac;
  return 0.0;
}

bool is_aggregating(std::string_view scheduler) {
  try {
    return SchedulerSpec::parse(scheduler).aggregates();
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::vector<RunRecord> run_suite(const ScenarioConfig& config, const SuiteOptions& options) {
  validate(config);
  const std::uint32_t seeds = options.seeds.value_or(config.replications);
  if (seeds == 0) throw Error(ErrorCode::kConfigInvalid, "seeds: must be positive");

  struct Task {
    SchedulerSpec scheduler;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& s : config.schedulers) {
    for (std::uint32_t r = 0; r < seeds; ++r) tasks.push_back({s, config.seed_base + r});
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        records[i] = RunRecord{config.name, tasks[i].scheduler.name(), tasks[i].seed,
                               simulate(config, tasks[i].scheduler, tasks[i].seed)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
      }
    }
  };

  const unsigned jobs = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<std::string> compared_metrics() {
  return {"goodput_pps", "mean_latency_s", "p95_latency_s", "mean_reseq_delay_s", "max_reseq_delay_s",
          "out_of_order_frac"};
}

ComparisonSummary compare(std::span<const RunRecord> records, std::string_view baseline) {
  // scenario -> scheduler -> seed -> metrics
  std::map<std::string, std::map<std::string, std::map<std::uint64_t, const MetricsReport*>>> table;
  std::vector<std::string> scenario_order;
  std::map<std::string, std::vector<std::string>> scheduler_order;
  for (const auto& r : records) {
    if (!table.contains(r.scenario)) scenario_order.push_back(r.scenario);
    auto& per_sched = table[r.scenario];
    if (!per_sched.contains(r.scheduler)) scheduler_order[r.scenario].push_back(r.scheduler);
    per_sched[r.scheduler][r.seed] = &r.metrics;
  }
  if (table.empty()) throw Error(ErrorCode::kMismatchedSeeds, "no records to compare");

  ComparisonSummary summary;
  for (const auto& scenario : scenario_order) {
    const auto& per_sched = table[scenario];
    if (per_sched.size() < 2) {
      throw Error(ErrorCode::kMismatchedSeeds, scenario + ": comparison needs at least two schedulers");
    }
    auto base_it = per_sched.find(std::string(baseline));
    if (base_it == per_sched.end()) {
      throw Error(ErrorCode::kMismatchedSeeds, scenario + ": baseline '" + std::string(baseline) + "' missing");
    }
    const auto& base = base_it->second;
    for (const auto& scheme : scheduler_order[scenario]) {
      const auto& runs = per_sched.at(scheme);
      std::set<std::uint64_t> a, b;
      for (const auto& [seed, _] : runs) a.insert(seed);
      for (const auto& [seed, _] : base) b.insert(seed);
      if (a != b) {
        throw Error(ErrorCode::kMismatchedSeeds, scenario + ": '" + scheme + "' and baseline '" +
                                                     std::string(baseline) + "' cover different seeds");
      }
      if (scheme == baseline) continue;
      SchemeComparison row{scenario, scheme, std::string(baseline), runs.size(), {}};
      for (const auto& metric : compared_metrics()) {
        MetricDelta d{metric, 0.0, 0.0, 0.0, 0, 0, 0};
        for (const auto& [seed, m] : runs) {
          const double x = metric_value(*m, metric);
          const double y = metric_value(*base.at(seed), metric);
          d.scheme_mean += x;
          d.baseline_mean += y;
          d.mean_delta += x - y;
          if (x < y) {
            ++d.lower;
          } else if (x > y) {
            ++d.higher;
          } else {
            ++d.ties;
          }
        }
        const auto n = static_cast<double>(runs.size());
        d.scheme_mean /= n;
        d.baseline_mean /= n;
        d.mean_delta /= n;
        row.deltas.push_back(d);
      }
      summary.rows.push_back(std::move(row));
    }

    // Expected dominance: the leaky bucket has the lowest mean latency and
    // resequencing delay among aggregating schemes; non-aggregating schemes
    // never reorder and aggregating ones do.
    auto mean_of = [&](const std::string& scheme, std::string_view metric) {
      double s = 0.0;
      for (const auto& [seed, m] : per_sched.at(scheme)) s += metric_value(*m, metric);
      return s / static_cast<double>(per_sched.at(scheme).size());
    };
    const std::string leaky = "leaky_bucket";
    for (const auto& scheme : scheduler_order[scenario]) {
      for (const auto& [seed, m] : per_sched.at(scheme)) {
        const bool agg = is_aggregating(scheme);
        if (!agg && m->out_of_order_frac != 0.0) {
          summary.violations.push_back(scenario + ": " + scheme + " seed " + std::to_string(seed) +
                                       " reorders without aggregating");
        }
      }
      if (!per_sched.contains(leaky) || scheme == leaky || !is_aggregating(scheme)) continue;
      for (std::string_view metric : {"mean_latency_s", "mean_reseq_delay_s"}) {
        if (mean_of(leaky, metric) > mean_of(scheme, metric)) {
          summary.violations.push_back(scenario + ": leaky_bucket " + std::string(metric) + " above " + scheme);
        }
      }
    }
  }
  return summary;
}

std::string format_summary(const ComparisonSummary& summary) {
  std::ostringstream os;
  os << "scenario,scheme,baseline,seeds,metric,scheme_mean,baseline_mean,mean_delta,lower,higher,ties\n";
  os.precision(9);
  for (const auto& row : summary.rows) {
    for (const auto& d : row.deltas) {
      os << row.scenario << "," << row.scheme << "," << row.baseline << "," << row.seeds << "," << d.metric << ","
         << d.scheme_mean << "," << d.baseline_mean << "," << d.mean_delta << "," << d.lower << "," << d.higher
         << "," << d.ties << "\n";
    }
  }
  for (const auto& v : summary.violations) os << "# violation: " << v << "\n";
  return os.str();
}

}  // namespace bandsplit
