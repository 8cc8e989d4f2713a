#include "bandsplit/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bandsplit/error.hpp"

namespace bandsplit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::kConfigInvalid, field + ": " + message);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where.empty() ? key : where + "." + key, "missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

DistributionSpec parse_distribution(const json& v, const std::string& field) {
  if (!v.is_object()) fail(field, "expected an object");
  reject_unknown(v, field, {"kind", "mean", "mu_log", "sigma_log"});
  DistributionSpec d;
  try {
    d.kind = distribution_kind_from_string(as_string(require(v, "kind", field), field + ".kind"));
  } catch (const Error&) {
    fail(field + ".kind", "expected deterministic, exponential or lognormal");
  }
  if (d.kind == DistributionKind::kLognormal) {
    d = DistributionSpec::lognormal(as_number(require(v, "mu_log", field), field + ".mu_log"),
                                    as_number(require(v, "sigma_log", field), field + ".sigma_log"));
  } else {
    d.mean = as_number(require(v, "mean", field), field + ".mean");
  }
  try {
    validate(d);
  } catch (const Error& e) {
    fail(field, e.what());
  }
  return d;
}

json distribution_json(const DistributionSpec& d) {
  json j;
  j["kind"] = std::string(to_string(d.kind));
  if (d.kind == DistributionKind::kLognormal) {
    j["mu_log"] = d.mu_log;
    j["sigma_log"] = d.sigma_log;
  } else {
    j["mean"] = d.mean;
  }
  return j;
}

ScenarioConfig from_json(const json& root) {
  if (!root.is_object()) fail("<root>", "expected an object");
  reject_unknown(root, "",
                 {"name", "bands", "stas", "ac_priority", "flows", "schedulers", "scheduler", "vacation",
                  "feedback_interval", "warmup_frac", "seed_base", "replications", "queue_cap",
                  "estimator_window", "min_samples", "token_increment", "batch_size", "max_sim_time_s",
                  "stability_margin"});
  ScenarioConfig c;
  if (root.contains("name")) c.name = as_string(root["name"], "name");

  const auto& bands = require(root, "bands", "");
  if (!bands.is_array()) fail("bands", "expected an array");
  for (std::size_t j = 0; j < bands.size(); ++j) {
    const std::string where = "bands[" + std::to_string(j) + "]";
    const auto& b = bands[j];
    if (!b.is_object()) fail(where, "expected an object");
    reject_unknown(b, where, {"name", "service", "prop_latency_s"});
    BandConfig bc;
    bc.name = b.contains("name") ? as_string(b["name"], where + ".name") : "band" + std::to_string(j);
    bc.service = parse_distribution(require(b, "service", where), where + ".service");
    if (b.contains("prop_latency_s")) bc.prop_latency_s = as_number(b["prop_latency_s"], where + ".prop_latency_s");
    c.bands.push_back(bc);
  }

  if (root.contains("stas")) c.stas = static_cast<std::uint32_t>(as_count(root["stas"], "stas"));
  if (root.contains("ac_priority")) {
    const auto& acs = root["ac_priority"];
    if (!acs.is_array()) fail("ac_priority", "expected an array");
    c.ac_priority.clear();
    for (std::size_t i = 0; i < acs.size(); ++i) {
      c.ac_priority.push_back(
          static_cast<std::uint32_t>(as_count(acs[i], "ac_priority[" + std::to_string(i) + "]")));
    }
  }

  const auto& flows = require(root, "flows", "");
  if (!flows.is_array()) fail("flows", "expected an array");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const std::string where = "flows[" + std::to_string(i) + "]";
    const auto& f = flows[i];
    if (!f.is_object()) fail(where, "expected an object");
    reject_unknown(f, where, {"sta", "ac", "lambda", "packets", "bands"});
    FlowConfig fc;
    if (f.contains("sta")) fc.key.sta = static_cast<std::uint32_t>(as_count(f["sta"], where + ".sta"));
    if (f.contains("ac")) fc.key.ac = static_cast<std::uint32_t>(as_count(f["ac"], where + ".ac"));
    fc.lambda = as_number(require(f, "lambda", where), where + ".lambda");
    fc.packets = as_count(require(f, "packets", where), where + ".packets");
    if (f.contains("bands")) {
      const auto& mask = f["bands"];
      if (!mask.is_array()) fail(where + ".bands", "expected an array of booleans");
      for (const auto& bit : mask) {
        if (!bit.is_boolean()) fail(where + ".bands", "expected an array of booleans");
        fc.bands.push_back(bit.get<bool>());
      }
    }
    c.flows.push_back(fc);
  }

  if (root.contains("schedulers") && root.contains("scheduler")) {
    fail("scheduler", "give either 'scheduler' or 'schedulers'");
  }
  std::vector<std::string> names;
  if (root.contains("scheduler")) names.push_back(as_string(root["scheduler"], "scheduler"));
  if (root.contains("schedulers")) {
    const auto& list = root["schedulers"];
    if (!list.is_array() || list.empty()) fail("schedulers", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      names.push_back(as_string(list[i], "schedulers[" + std::to_string(i) + "]"));
    }
  }
  if (!names.empty()) {
    c.schedulers.clear();
    // Aliases only expand to single-band schemes every flow can use.
    auto usable = [&](std::uint32_t j) {
      for (const auto& f : c.flows) {
        if (!f.bands.empty() && j < f.bands.size() && !f.bands[j]) return false;
      }
      return true;
    };
    for (const auto& n : names) {
      if (n == "all") {
        for (const auto& s : all_schedulers(c.bands.size())) {
          if (s.kind != SchedulerKind::kSingleBand || usable(s.band)) c.schedulers.push_back(s);
        }
      } else if (n == "single_band") {
        for (std::uint32_t j = 0; j < c.bands.size(); ++j) {
          if (usable(j)) c.schedulers.push_back({SchedulerKind::kSingleBand, j});
        }
        if (c.schedulers.empty()) fail("schedulers", "no band is available to every flow");
      } else {
        try {
          c.schedulers.push_back(SchedulerSpec::parse(n));
        } catch (const Error&) {
          fail("schedulers", "unknown scheduler '" + n + "'");
        }
      }
    }
  }

  if (root.contains("vacation")) {
    const auto& v = root["vacation"];
    if (!v.is_object()) fail("vacation", "expected an object");
    reject_unknown(v, "vacation", {"mode", "dist"});
    try {
      c.vacation_mode = vacation_mode_from_string(as_string(require(v, "mode", "vacation"), "vacation.mode"));
    } catch (const Error&) {
      fail("vacation.mode", "expected emergent or parametric");
    }
    if (v.contains("dist")) {
      c.vacation = parse_distribution(v["dist"], "vacation.dist");
    } else if (c.vacation_mode == VacationMode::kParametric) {
      fail("vacation.dist", "missing (required in parametric mode)");
    }
  }

  if (root.contains("feedback_interval")) c.feedback_interval = as_count(root["feedback_interval"], "feedback_interval");
  if (root.contains("warmup_frac")) c.warmup_frac = as_number(root["warmup_frac"], "warmup_frac");
  if (root.contains("seed_base")) c.seed_base = as_count(root["seed_base"], "seed_base");
  if (root.contains("replications")) {
    c.replications = static_cast<std::uint32_t>(as_count(root["replications"], "replications"));
  }
  if (root.contains("queue_cap")) c.queue_cap = as_count(root["queue_cap"], "queue_cap");
  if (root.contains("estimator_window")) c.estimator_window = as_count(root["estimator_window"], "estimator_window");
  if (root.contains("min_samples")) c.min_samples = as_count(root["min_samples"], "min_samples");
  if (root.contains("token_increment")) {
    try {
      c.token_increment = token_increment_from_string(as_string(root["token_increment"], "token_increment"));
    } catch (const Error&) {
      fail("token_increment", "expected share or utilization");
    }
  }
  if (root.contains("batch_size")) c.batch_size = as_count(root["batch_size"], "batch_size");
  if (root.contains("max_sim_time_s")) c.max_sim_time_s = as_number(root["max_sim_time_s"], "max_sim_time_s");
  if (root.contains("stability_margin")) c.stability_margin = as_number(root["stability_margin"], "stability_margin");

  validate(c);
  return c;
}

json to_json(const ScenarioConfig& c) {
  json root;
  root["name"] = c.name;
  root["bands"] = json::array();
  for (const auto& b : c.bands) {
    root["bands"].push_back({{"name", b.name}, {"service", distribution_json(b.service)},
                             {"prop_latency_s", b.prop_latency_s}});
  }
  root["stas"] = c.stas;
  root["ac_priority"] = c.ac_priority;
  root["flows"] = json::array();
  for (const auto& f : c.flows) {
    json jf{{"sta", f.key.sta}, {"ac", f.key.ac}, {"lambda", f.lambda}, {"packets", f.packets}};
    if (!f.bands.empty()) {
      jf["bands"] = json::array();
      for (bool bit : f.bands) jf["bands"].push_back(bit);
    }
    root["flows"].push_back(jf);
  }
  root["schedulers"] = json::array();
  for (const auto& s : c.schedulers) root["schedulers"].push_back(s.name());
  root["vacation"] = {{"mode", std::string(to_string(c.vacation_mode))}, {"dist", distribution_json(c.vacation)}};
  root["feedback_interval"] = c.feedback_interval;
  root["warmup_frac"] = c.warmup_frac;
  root["seed_base"] = c.seed_base;
  root["replications"] = c.replications;
  root["queue_cap"] = c.queue_cap;
  root["estimator_window"] = c.estimator_window;
  root["min_samples"] = c.min_samples;
  root["token_increment"] = std::string(to_string(c.token_increment));
  root["batch_size"] = c.batch_size;
  root["max_sim_time_s"] = c.max_sim_time_s;
  root["stability_margin"] = c.stability_margin;
  return root;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ScenarioConfig two_band_base(std::string name) {
  ScenarioConfig c;
  c.name = std::move(name);
  // Service-rate ratio 1.75 : 1 between the TV-white-space and ISM bands.
  c.bands = {BandConfig{"ism", DistributionSpec::exponential(1.0 / 100.0), 0.0},
             BandConfig{"tvws", DistributionSpec::exponential(1.0 / 175.0), 0.0}};
  c.stas = 1;
  c.flows = {FlowConfig{{0, 0}, 216.0, 50000, {}}};
  c.schedulers = all_schedulers(2);
  return c;
}

}  // namespace

std::string_view to_string(VacationMode mode) {
  return mode == VacationMode::kEmergent ? "emergent" : "parametric";
}

VacationMode vacation_mode_from_string(std::string_view name) {
  if (name == "emergent") return VacationMode::kEmergent;
  if (name == "parametric") return VacationMode::kParametric;
  throw Error(ErrorCode::kConfigInvalid, "unknown vacation mode '" + std::string(name) + "'");
}

AvailabilityMask ScenarioConfig::mask_for(std::size_t flow) const {
  const auto& bits = flows.at(flow).bands;
  return bits.empty() ? AvailabilityMask::all(bands.size()) : AvailabilityMask{bits};
}

void validate(const ScenarioConfig& c) {
  if (c.bands.empty()) fail("bands", "at least one band is required");
  for (std::size_t j = 0; j < c.bands.size(); ++j) {
    const std::string where = "bands[" + std::to_string(j) + "]";
    try {
      validate(c.bands[j].service);
    } catch (const Error& e) {
      fail(where + ".service", e.what());
    }
    if (!(c.bands[j].prop_latency_s >= 0.0) || !std::isfinite(c.bands[j].prop_latency_s)) {
      fail(where + ".prop_latency_s", "must be finite and non-negative");
    }
  }
  if (c.stas == 0) fail("stas", "must be positive");
  if (c.ac_priority.empty()) fail("ac_priority", "must list at least one access category");
  std::set<std::uint32_t> acs;
  for (auto ac : c.ac_priority) {
    if (ac >= static_cast<std::uint32_t>(kNumAccessCategories)) fail("ac_priority", "access category must be < 4");
    if (!acs.insert(ac).second) fail("ac_priority", "duplicate access category");
  }
  if (c.flows.empty()) fail("flows", "at least one flow is required");
  std::set<FlowKey> keys;
  double offered = 0.0;
  for (std::size_t i = 0; i < c.flows.size(); ++i) {
    const std::string where = "flows[" + std::to_string(i) + "]";
    const auto& f = c.flows[i];
    if (!valid_flow_key(f.key, c.stas)) fail(where, "sta must be < stas and ac < 4");
    if (!acs.contains(f.key.ac)) fail(where + ".ac", "access category missing from ac_priority");
    if (!keys.insert(f.key).second) fail(where, "duplicate (sta, ac) flow");
    if (!(f.lambda > 0.0) || !std::isfinite(f.lambda)) fail(where + ".lambda", "must be positive");
    if (f.packets == 0) fail(where + ".packets", "must be positive");
    if (!f.bands.empty()) {
      if (f.bands.size() != c.bands.size()) fail(where + ".bands", "mask length must equal band count");
      if (std::find(f.bands.begin(), f.bands.end(), true) == f.bands.end()) {
        fail(where + ".bands", "at least one band must be available");
      }
    }
    offered += f.lambda;
  }
  if (!(c.stability_margin > 0.0) || c.stability_margin > 1.0) fail("stability_margin", "must be in (0, 1]");
  double capacity = 0.0;
  for (const auto& b : c.bands) capacity += 1.0 / b.service.first_moment();
  if (offered >= c.stability_margin * capacity) {
    std::ostringstream os;
    os << "total offered load " << offered << " must stay below " << c.stability_margin
       << " of total service capacity " << capacity;
    fail("flows", os.str());
  }
  if (c.schedulers.empty()) fail("schedulers", "at least one scheduler is required");
  for (const auto& s : c.schedulers) {
    if (s.kind != SchedulerKind::kSingleBand) continue;
    if (s.band >= c.bands.size()) fail("schedulers", "single_band index out of range");
    for (std::size_t i = 0; i < c.flows.size(); ++i) {
      if (!c.flows[i].bands.empty() && !c.flows[i].bands[s.band]) {
        fail("schedulers", s.name() + " is unusable: flows[" + std::to_string(i) + "] masks that band");
      }
    }
  }
  if (c.vacation_mode == VacationMode::kParametric) {
    try {
      validate(c.vacation);
    } catch (const Error& e) {
      fail("vacation.dist", e.what());
    }
  }
  if (c.feedback_interval == 0) fail("feedback_interval", "must be positive");
  if (!(c.warmup_frac >= 0.0 && c.warmup_frac < 0.5)) fail("warmup_frac", "must be in [0, 0.5)");
  if (c.replications == 0) fail("replications", "must be positive");
  if (c.queue_cap == 0) fail("queue_cap", "must be positive");
  if (c.estimator_window == 0) fail("estimator_window", "must be positive");
  if (c.min_samples == 0 || c.min_samples > c.estimator_window) {
    fail("min_samples", "must be in [1, estimator_window]");
  }
  if (c.batch_size == 0) fail("batch_size", "must be positive");
  if (!(c.max_sim_time_s >= 0.0) || !std::isfinite(c.max_sim_time_s)) fail("max_sim_time_s", "must be >= 0");
}

std::vector<BandStats> nominal_stats(const ScenarioConfig& c) {
  std::vector<BandStats> out;
  for (const auto& b : c.bands) {
    BandStats s;
    s.mu = 1.0 / b.service.first_moment();
    s.x2 = b.service.second_moment();
    if (c.vacation_mode == VacationMode::kParametric) {
      s.vbar = c.vacation.first_moment();
      s.v2 = c.vacation.second_moment();
    }
    out.push_back(s);
  }
  return out;
}

ScenarioConfig parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte);
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": malformed JSON";
    throw Error(ErrorCode::kConfigInvalid, os.str());
  }
  return from_json(root);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string serialize_scenario(const ScenarioConfig& config) {
  return to_json(config).dump(2) + "\n";
}

std::vector<std::string> bundled_scenario_names() {
  return {"two_band_asym", "two_band_high_rtt", "two_sta_mixed"};
}

ScenarioConfig bundled_scenario(std::string_view name) {
  if (name == "two_band_asym") return two_band_base("two_band_asym");
  if (name == "two_band_high_rtt") {
    auto c = two_band_base("two_band_high_rtt");
    for (auto& b : c.bands) b.prop_latency_s = 0.1;
    return c;
  }
  if (name == "two_sta_mixed") {
    auto c = two_band_base("two_sta_mixed");
    c.stas = 2;
    // Station 1 is a legacy device confined to the ISM band.
    c.flows = {FlowConfig{{0, 0}, 150.0, 50000, {true, true}}, FlowConfig{{1, 0}, 50.0, 50000, {true, false}}};
    c.schedulers = {{SchedulerKind::kEvenSplit, 0},
                    {SchedulerKind::kLoadBalancing, 0},
                    {SchedulerKind::kMinimumDelay, 0},
                    {SchedulerKind::kLeakyBucket, 0}};
    return c;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown bundled scenario '" + std::string(name) + "'");
}

ScenarioConfig resolve_scenario(std::string_view path_or_name) {
  const std::filesystem::path path{std::string(path_or_name)};
  if (std::filesystem::exists(path)) return load_scenario(path);
  for (const auto& n : bundled_scenario_names()) {
    if (n == path_or_name) return bundled_scenario(n);
  }
  throw Error(ErrorCode::kIoError, "no such file or bundled scenario: " + std::string(path_or_name));
}

}  // namespace bandsplit
