#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bandsplit/scenario.hpp"

namespace bandsplit {

struct RunRecord {
  std::string scenario;
  std::string scheduler;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

enum class RecordFormat { kCsv, kJsonLines };

RecordFormat record_format_from_string(std::string_view name);

// Fixed column order: scenario, scheduler, seed, delivered, goodput_pps,
// mean_latency_s, p95_latency_s, mean_reseq_delay_s, max_reseq_delay_s,
// out_of_order_frac, band_frac_0 .. band_frac_{M-1}. Doubles are written
// with round-trip precision.
std::vector<std::string> csv_columns(std::size_t num_bands);

void write_records(std::ostream& out, std::span<const RunRecord> records, RecordFormat format);
void write_records(const std::filesystem::path& path, std::span<const RunRecord> records, RecordFormat format);

// Reads CSV or JSON lines (detected from content). Only the exported
// columns are populated.
std::vector<RunRecord> read_records(std::istream& in);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

}  // namespace bandsplit
