#include "bandsplit/records.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bandsplit/error.hpp"

namespace bandsplit {

using nlohmann::json;

namespace {

constexpr std::size_t kFixedColumns = 10;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIoError, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::uint64_t parse_count(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kIoError, "line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t band_count(std::span<const RunRecord> records) {
  return records.empty() ? 0 : records.front().metrics.per_band_frac.size();
}

}  // namespace

RecordFormat record_format_from_string(std::string_view name) {
  if (name == "csv") return RecordFormat::kCsv;
  if (name == "json" || name == "jsonl") return RecordFormat::kJsonLines;
  throw Error(ErrorCode::kConfigInvalid, "unknown output format '" + std::string(name) + "'");
}

std::vector<std::string> csv_columns(std::size_t num_bands) {
  std::vector<std::string> cols = {"scenario",          "scheduler",          "seed",
                                   "delivered",         "goodput_pps",        "mean_latency_s",
                                   "p95_latency_s",     "mean_reseq_delay_s", "max_reseq_delay_s",
                                   "out_of_order_frac"};
  for (std::size_t j = 0; j < num_bands; ++j) cols.push_back("band_frac_" + std::to_string(j));
  return cols;
}

void write_records(std::ostream& out, std::span<const RunRecord> records, RecordFormat format) {
  const std::size_t m = band_count(records);
  if (format == RecordFormat::kCsv) {
    const auto cols = csv_columns(m);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : records) {
      const auto& x = r.metrics;
      out << r.scenario << "," << r.scheduler << "," << r.seed << "," << x.delivered << ","
          << format_double(x.goodput_pps) << "," << format_double(x.mean_latency_s) << ","
          << format_double(x.p95_latency_s) << "," << format_double(x.mean_reseq_delay_s) << ","
          << format_double(x.max_reseq_delay_s) << "," << format_double(x.out_of_order_frac);
      for (double f : x.per_band_frac) out << "," << format_double(f);
      out << "\n";
    }
    return;
  }
  for (const auto& r : records) {
    const auto& x = r.metrics;
    // ordered_json keeps the CSV column order.
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["scheduler"] = r.scheduler;
    j["seed"] = r.seed;
    j["delivered"] = x.delivered;
    j["goodput_pps"] = x.goodput_pps;
    j["mean_latency_s"] = x.mean_latency_s;
    j["p95_latency_s"] = x.p95_latency_s;
    j["mean_reseq_delay_s"] = x.mean_reseq_delay_s;
    j["max_reseq_delay_s"] = x.max_reseq_delay_s;
    j["out_of_order_frac"] = x.out_of_order_frac;
    j["band_frac"] = x.per_band_frac;
    out << j.dump() << "\n";
  }
}

void write_records(const std::filesystem::path& path, std::span<const RunRecord> records, RecordFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_records(out, records, format);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RunRecord r;
    if (line.front() == '{') {
      json j;
      try {
        j = json::parse(line);
        r.scenario = j.at("scenario").get<std::string>();
        r.scheduler = j.at("scheduler").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.metrics.delivered = j.at("delivered").get<std::uint64_t>();
        r.metrics.goodput_pps = j.at("goodput_pps").get<double>();
        r.metrics.mean_latency_s = j.at("mean_latency_s").get<double>();
        r.metrics.p95_latency_s = j.at("p95_latency_s").get<double>();
        r.metrics.mean_reseq_delay_s = j.at("mean_reseq_delay_s").get<double>();
        r.metrics.max_reseq_delay_s = j.at("max_reseq_delay_s").get<double>();
        r.metrics.out_of_order_frac = j.at("out_of_order_frac").get<double>();
        r.metrics.per_band_frac = j.at("band_frac").get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kIoError, "line " + std::to_string(line_no) + ": " + e.what());
      }
      records.push_back(std::move(r));
      continue;
    }
    auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      if (header.size() < kFixedColumns || header[0] != "scenario") {
        throw Error(ErrorCode::kIoError, "line " + std::to_string(line_no) + ": missing CSV header");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kIoError, "line " + std::to_string(line_no) + ": expected " +
                                           std::to_string(header.size()) + " columns");
    }
    r.scenario = cells[0];
    r.scheduler = cells[1];
    r.seed = parse_count(cells[2], line_no);
    r.metrics.delivered = parse_count(cells[3], line_no);
    r.metrics.goodput_pps = parse_double(cells[4], line_no);
    r.metrics.mean_latency_s = parse_double(cells[5], line_no);
    r.metrics.p95_latency_s = parse_double(cells[6], line_no);
    r.metrics.mean_reseq_delay_s = parse_double(cells[7], line_no);
    r.metrics.max_reseq_delay_s = parse_double(cells[8], line_no);
    r.metrics.out_of_order_frac = parse_double(cells[9], line_no);
    for (std::size_t k = kFixedColumns; k < cells.size(); ++k) {
      r.metrics.per_band_frac.push_back(parse_double(cells[k], line_no));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_records(in);
}

}  // namespace bandsplit
