#pragma once

// JSON scenario files.
//
//   {
//     "name": "two_band_asym",
//     "bands": [{"name": "ism", "service": {"kind": "exponential", "mean": 0.01},
//                "prop_latency_s": 0.0}, ...],
//     "stas": 1,
//     "ac_priority": [3, 2, 0, 1],
//     "flows": [{"sta": 0, "ac": 0, "lambda": 216, "packets": 50000,
//                "bands": [true, true]}],
//     "schedulers": ["all"],            // or explicit names
//     "vacation": {"mode": "emergent"}, // or parametric with "dist"
//     "feedback_interval": 100, "warmup_frac": 0.1, "seed_base": 1,
//     "replications": 10, ...
//   }
//
// Every key except "bands" and "flows" is optional. Unknown keys are
// rejected.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bandsplit/scenario.hpp"

namespace bandsplit {

ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioConfig& config);

std::vector<std::string> bundled_scenario_names();
// Throws kConfigInvalid for an unknown name.
ScenarioConfig bundled_scenario(std::string_view name);

// A path to an existing file, or the name of a bundled scenario.
ScenarioConfig resolve_scenario(std::string_view path_or_name);

}  // namespace bandsplit
