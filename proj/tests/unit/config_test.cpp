#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "bandsplit/config.hpp"
#include "bandsplit/error.hpp"

namespace bandsplit {
namespace {

constexpr const char* kMinimal = R"({
  "bands": [{"service": {"kind": "exponential", "mean": 0.01}},
            {"name": "slow", "service": {"kind": "deterministic", "mean": 0.02}, "prop_latency_s": 0.05}],
  "flows": [{"lambda": 60, "packets": 1000}]
})";

Error error_of(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error";
  return Error(ErrorCode::kIoError, "");
}

TEST(Config, MinimalDefaults) {
  auto c = parse_scenario(kMinimal);
  ASSERT_EQ(c.bands.size(), 2u);
  EXPECT_EQ(c.bands[0].name, "band0");
  EXPECT_EQ(c.bands[1].prop_latency_s, 0.05);
  EXPECT_EQ(c.flows[0].key, (FlowKey{0, 0}));
  EXPECT_EQ(c.schedulers.size(), 1u);
  EXPECT_EQ(c.schedulers[0].kind, SchedulerKind::kLeakyBucket);
  EXPECT_EQ(c.vacation_mode, VacationMode::kEmergent);
}

TEST(Config, RoundTrip) {
  for (const auto& name : bundled_scenario_names()) {
    auto c = bundled_scenario(name);
    auto again = parse_scenario(serialize_scenario(c));
    EXPECT_EQ(again, c) << name;
    EXPECT_EQ(serialize_scenario(again), serialize_scenario(c));
  }
  auto custom = parse_scenario(kMinimal);
  custom.vacation_mode = VacationMode::kParametric;
  custom.vacation = DistributionSpec::lognormal(-4.0, 0.5);
  custom.token_increment = TokenIncrement::kUtilization;
  EXPECT_EQ(parse_scenario(serialize_scenario(custom)), custom);
}

TEST(Config, SchedulerAliases) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "schedulers": ["all"])");
  EXPECT_EQ(parse_scenario(text).schedulers.size(), 7u);
  text = kMinimal;
  text.insert(text.rfind('}'), R"(, "schedulers": ["single_band", "leaky_bucket"])");
  auto c = parse_scenario(text);
  ASSERT_EQ(c.schedulers.size(), 3u);
  EXPECT_EQ(c.schedulers[1].name(), "single_band:1");
}

TEST(Config, SingleBandAliasesSkipMaskedBands) {
  constexpr const char* kMasked = R"({
    "bands": [{"service": {"kind": "exponential", "mean": 0.01}}, {"service": {"kind": "exponential", "mean": 0.01}}],
    "stas": 2,
    "flows": [{"sta": 0, "lambda": 50, "packets": 100}, {"sta": 1, "lambda": 20, "packets": 100, "bands": [true, false]}],
    "schedulers": ["all"]
  })";
  auto c = parse_scenario(kMasked);
  ASSERT_EQ(c.schedulers.size(), 6u);
  EXPECT_EQ(c.schedulers[0].name(), "single_band:0");
  EXPECT_EQ(c.schedulers[1].name(), "even_split");
  std::string explicit_single = kMasked;
  explicit_single.replace(explicit_single.find("\"all\""), 5, "\"single_band:1\"");
  auto e = error_of(explicit_single);
  EXPECT_NE(std::string(e.what()).find("flows[1]"), std::string::npos) << e.what();
}

TEST(Config, EmptyFlowsRejected) {
  auto e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": 0.01}}], "flows": []})");
  EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  EXPECT_NE(std::string(e.what()).find("flows"), std::string::npos);
}

TEST(Config, MalformedJsonReportsPosition) {
  auto e = error_of("{\n  \"bands\": [\n    {\"service\": }\n]}");
  EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
}

TEST(Config, FieldPathsInErrors) {
  auto e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": -1}}], "flows": [{"lambda": 1, "packets": 5}]})");
  EXPECT_NE(std::string(e.what()).find("bands[0].service"), std::string::npos) << e.what();
  e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": 0.1}}], "flows": [{"lambda": 1, "packets": 5, "colour": 1}]})");
  EXPECT_NE(std::string(e.what()).find("flows[0].colour"), std::string::npos) << e.what();
  e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": 0.1}}], "flows": [{"lambda": 20, "packets": 5}]})");
  EXPECT_NE(std::string(e.what()).find("capacity"), std::string::npos) << e.what();
  e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": 0.1}}], "flows": [{"lambda": 1, "packets": 5, "bands": [true, false]}]})");
  EXPECT_NE(std::string(e.what()).find("flows[0].bands"), std::string::npos) << e.what();
  e = error_of(R"({"bands": [{"service": {"kind": "exponential", "mean": 0.1}}], "flows": [{"lambda": 1, "packets": 5}], "vacation": {"mode": "parametric"}})");
  EXPECT_NE(std::string(e.what()).find("vacation.dist"), std::string::npos) << e.what();
}

TEST(Config, BundledFilesMatchBuiltIns) {
  for (const auto& name : bundled_scenario_names()) {
    const auto path = std::filesystem::path(BANDSPLIT_SCENARIO_DIR) / (name + ".json");
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(load_scenario(path), bundled_scenario(name)) << name;
  }
}

TEST(Config, ResolveByNameOrPath) {
  EXPECT_EQ(resolve_scenario("two_band_asym").name, "two_band_asym");
  try {
    resolve_scenario("/nonexistent/nothing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(Config, AsymmetricRatio) {
  auto c = bundled_scenario("two_band_asym");
  const double ratio = c.bands[0].service.first_moment() / c.bands[1].service.first_moment();
  EXPECT_NEAR(ratio, 1.75, 1e-12);
}

}  // namespace
}  // namespace bandsplit
