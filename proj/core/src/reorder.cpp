#include "bandsplit/reorder.hpp"

#include <string>

#include "bandsplit/error.hpp"

namespace bandsplit {

std::vector<Packet> ReorderBuffer::push(Packet pkt, double now) {
  if (pkt.seq < next_ || pending_.contains(pkt.seq)) {
    throw Error(ErrorCode::kDuplicateSeq, "sequence " + std::to_string(pkt.seq) + " already seen");
  }
  pkt.received_at = now;
  std::vector<Packet> released;
  if (pkt.seq != next_) {
    pending_.emplace(pkt.seq, pkt);
    return released;
  }
  pkt.released_at = now;
  released.push_back(pkt);
  ++next_;
  for (auto it = pending_.begin(); it != pending_.end() && it->first == next_; it = pending_.erase(it)) {
    it->second.released_at = now;
    released.push_back(it->second);
    ++next_;
  }
  return released;
}

}  // namespace bandsplit
