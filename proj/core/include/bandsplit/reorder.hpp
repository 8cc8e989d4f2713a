#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bandsplit/packet.hpp"

namespace bandsplit {

// Receiver-side resequencer for one flow. Packets are held until every
// lower sequence number has been released; the resequencing delay of a
// packet is released_at - received_at.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(std::uint64_t first_seq = 0) : next_(first_seq) {}

  // Accepts `pkt` at time `now` and returns the in-order run it completes,
  // each stamped with released_at = now. Throws kDuplicateSeq.
  std::vector<Packet> push(Packet pkt, double now);

  // True if some lower sequence number is still outstanding, i.e. `seq`
  // would arrive out of order.
  bool would_wait(std::uint64_t seq) const { return seq != next_; }

  std::uint64_t next_expected() const { return next_; }
  std::size_t held() const { return pending_.size(); }

 private:
  std::uint64_t next_;
  std::map<std::uint64_t, Packet> pending_;
};

}  // namespace bandsplit
