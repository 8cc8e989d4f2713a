#pragma once

#include <cstdint>

namespace bandsplit {

inline constexpr std::uint32_t kNoBand = 0xffffffffU;

struct Packet {
  std::uint64_t seq = 0;      // per-flow, strictly increasing at creation
  std::uint32_t flow = 0;     // index into the scenario's flow list
  std::uint32_t band = kNoBand;
  double created_at = 0.0;
  double service_start = 0.0;
  double service_end = 0.0;
  double received_at = 0.0;
  double released_at = 0.0;
  bool out_of_order = false;  // a lower seq was still outstanding on receipt
};

}  // namespace bandsplit
