#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bandsplit/config.hpp"
#include "bandsplit/error.hpp"
#include "bandsplit/suite.hpp"

namespace bandsplit {
namespace {

ScenarioConfig small_asym() {
  auto c = bundled_scenario("two_band_asym");
  c.flows[0].packets = 4000;
  return c;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  write_records(os, records, RecordFormat::kCsv);
  return os.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bandsplit_test_" + name);
}

TEST(Suite, RecordCountIsSchemesTimesSeeds) {
  auto c = small_asym();
  auto records = run_suite(c, {.seeds = 10, .jobs = 4});
  ASSERT_EQ(records.size(), 70u);
  EXPECT_EQ(records[0].scheduler, "single_band:0");
  EXPECT_EQ(records[0].seed, 1u);
  EXPECT_EQ(records[9].seed, 10u);
  EXPECT_EQ(records[69].scheduler, "leaky_bucket");
  c.schedulers = {SchedulerSpec::parse("even_split"), SchedulerSpec::parse("leaky_bucket")};
  c.replications = 3;
  EXPECT_EQ(run_suite(c).size(), 6u);
}

TEST(Suite, JobsDoNotChangeOutput) {
  auto c = small_asym();
  c.replications = 4;
  EXPECT_EQ(to_csv(run_suite(c, {.jobs = 1})), to_csv(run_suite(c, {.jobs = 8})));
}

TEST(Records, CsvAndJsonCarrySameValues) {
  auto c = small_asym();
  c.replications = 2;
  auto records = run_suite(c, {.jobs = 2});
  std::ostringstream csv, jsonl;
  write_records(csv, records, RecordFormat::kCsv);
  write_records(jsonl, records, RecordFormat::kJsonLines);
  std::istringstream a(csv.str()), b(jsonl.str());
  auto from_csv = read_records(a);
  auto from_json = read_records(b);
  ASSERT_EQ(from_csv.size(), records.size());
  ASSERT_EQ(from_json.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(from_csv[i].scheduler, from_json[i].scheduler);
    EXPECT_EQ(from_csv[i].seed, from_json[i].seed);
    EXPECT_EQ(from_csv[i].metrics.mean_latency_s, records[i].metrics.mean_latency_s);
    EXPECT_EQ(from_json[i].metrics.mean_latency_s, records[i].metrics.mean_latency_s);
    EXPECT_EQ(from_csv[i].metrics.per_band_frac, from_json[i].metrics.per_band_frac);
    EXPECT_EQ(from_csv[i].metrics.out_of_order_frac, from_json[i].metrics.out_of_order_frac);
    EXPECT_EQ(from_csv[i].metrics.delivered, from_json[i].metrics.delivered);
  }
}

TEST(Records, CsvHeader) {
  auto cols = csv_columns(2);
  ASSERT_EQ(cols.size(), 12u);
  EXPECT_EQ(cols[0], "scenario");
  EXPECT_EQ(cols[3], "delivered");
  EXPECT_EQ(cols[11], "band_frac_1");
}

TEST(Compare, SingleSchemeRejected) {
  auto c = small_asym();
  c.schedulers = {SchedulerSpec::parse("leaky_bucket")};
  c.replications = 2;
  auto records = run_suite(c);
  try {
    compare(records, "leaky_bucket");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatchedSeeds);
  }
}

TEST(Compare, MismatchedSeedSets) {
  auto c = small_asym();
  c.schedulers = {SchedulerSpec::parse("even_split"), SchedulerSpec::parse("leaky_bucket")};
  c.replications = 3;
  auto records = run_suite(c);
  records.pop_back();
  EXPECT_THROW(compare(records, "even_split"), Error);
}

TEST(Compare, DuplicatedSchemeHasZeroDeltas) {
  auto c = small_asym();
  c.schedulers = {SchedulerSpec::parse("leaky_bucket")};
  c.replications = 3;
  auto records = run_suite(c);
  auto copy = records;
  for (auto& r : copy) r.scheduler = "leaky_copy";
  records.insert(records.end(), copy.begin(), copy.end());
  auto summary = compare(records, "leaky_bucket");
  ASSERT_EQ(summary.rows.size(), 1u);
  for (const auto& d : summary.rows[0].deltas) {
    EXPECT_EQ(d.mean_delta, 0.0) << d.metric;
    EXPECT_EQ(d.ties, 3u) << d.metric;
  }
}

TEST(Compare, LeakyBucketResequencesLessThanMinimumDelay) {
  auto c = small_asym();
  c.schedulers = {SchedulerSpec::parse("minimum_delay"), SchedulerSpec::parse("leaky_bucket")};
  auto records = run_suite(c, {.seeds = 10, .jobs = 4});
  auto summary = compare(records, "minimum_delay");
  for (const auto& d : summary.rows.at(0).deltas) {
    if (d.metric == "mean_reseq_delay_s") EXPECT_GE(d.lower, 9u);
  }
  EXPECT_FALSE(format_summary(summary).empty());
}

TEST(Suite, SingleBandScenarioDegenerates) {
  ScenarioConfig c;
  c.name = "one";
  c.bands = {{"only", DistributionSpec::exponential(0.01), 0.0}};
  c.flows = {{{0, 0}, 60.0, 60000, {}}};
  c.schedulers = {SchedulerSpec::parse("single_band:0"), SchedulerSpec::parse("leaky_bucket")};
  c.replications = 1;
  auto records = run_suite(c, {.jobs = 2});
  const double a = records[0].metrics.mean_latency_s;
  const double b = records[1].metrics.mean_latency_s;
  EXPECT_NEAR(a, b, 0.02 * a);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BANDSPLIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << R"({"bands": [], "flows": []})";
  EXPECT_EQ(run_cli("run " + bad.string()), 2);
  EXPECT_EQ(run_cli("run no_such_scenario"), 2);
  EXPECT_EQ(run_cli("run two_band_asym --format xml"), 2);

  const auto cfg = temp_path("ok.json");
  auto c = small_asym();
  c.flows[0].packets = 1000;
  c.schedulers = {SchedulerSpec::parse("even_split"), SchedulerSpec::parse("leaky_bucket")};
  std::ofstream(cfg) << serialize_scenario(c);
  const auto out = temp_path("out.csv");
  EXPECT_EQ(run_cli("run " + cfg.string() + " --seeds 2 --out " + out.string()), 0);
  EXPECT_EQ(read_records(out).size(), 4u);
  EXPECT_EQ(run_cli("compare " + out.string() + " --baseline even_split"), 0);
  EXPECT_EQ(run_cli("compare " + out.string() + " --baseline minimum_delay"), 3);
  EXPECT_EQ(run_cli("dump two_band_asym"), 0);

  const auto overloaded = temp_path("overload.json");
  c.queue_cap = 1;
  c.schedulers = {SchedulerSpec::parse("single_band:1")};
  std::ofstream(overloaded) << serialize_scenario(c);
  EXPECT_EQ(run_cli("run " + overloaded.string() + " --seeds 1 --out " + out.string()), 3);
}

}  // namespace
}  // namespace bandsplit
