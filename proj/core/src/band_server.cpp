#include "bandsplit/band_server.hpp"

#include <algorithm>
#include <limits>

#include "bandsplit/error.hpp"

namespace bandsplit {

BandServer::BandServer(std::vector<FlowKey> flows, const std::vector<std::uint32_t>& ac_priority,
                       std::size_t estimator_window)
    : flows_(std::move(flows)),
      queues_(flows_.size()),
      last_completion_(flows_.size(), -std::numeric_limits<double>::infinity()),
      service_(flows_.size(), MomentEstimator(estimator_window)),
      vacation_(flows_.size(), MomentEstimator(estimator_window)),
      band_vacation_(estimator_window) {
  for (std::uint32_t ac : ac_priority) {
    std::vector<std::uint32_t> level;
    for (std::uint32_t f = 0; f < flows_.size(); ++f) {
      if (flows_[f].ac == ac) level.push_back(f);
    }
    std::stable_sort(level.begin(), level.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return flows_[a].sta < flows_[b].sta; });
    levels_.push_back(std::move(level));
  }
  // Cursor points at the last served position; start so index 0 goes first.
  cursor_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) cursor_[l] = levels_[l].empty() ? 0 : levels_[l].size() - 1;
}

void BandServer::enqueue(const Packet& pkt) {
  queues_.at(pkt.flow).push_back(pkt);
  ++waiting_;
}

std::uint32_t BandServer::choose_flow() const {
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& level = levels_[l];
    for (std::size_t step = 1; step <= level.size(); ++step) {
      const auto f = level[(cursor_[l] + step) % level.size()];
      if (!queues_[f].empty()) return f;
    }
  }
  throw Error(ErrorCode::kInfeasible, "band server asked to serve with every queue empty");
}

std::uint32_t BandServer::start_service(double now, double service_time) {
  if (!idle()) throw Error(ErrorCode::kInfeasible, "band server is not idle");
  const std::uint32_t f = choose_flow();
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    auto it = std::find(levels_[l].begin(), levels_[l].end(), f);
    if (it != levels_[l].end()) {
      cursor_[l] = static_cast<std::size_t>(it - levels_[l].begin());
      break;
    }
  }
  Packet pkt = queues_[f].front();
  queues_[f].pop_front();
  --waiting_;

  // Time this flow was backlogged while the band served someone else (or
  // was away). Idle time is excluded because the band is work-conserving.
  const double backlogged_since = std::max(last_completion_[f], pkt.created_at);
  vacation_[f].push(std::max(0.0, now - backlogged_since));
  service_[f].push(service_time);

  pkt.service_start = now;
  current_ = pkt;
  current_service_ = service_time;
  return f;
}

Packet BandServer::finish_service(double now) {
  if (!current_) throw Error(ErrorCode::kInfeasible, "no packet in service");
  Packet pkt = *current_;
  current_.reset();
  pkt.service_end = now;
  last_completion_[pkt.flow] = now;
  return pkt;
}

void BandServer::begin_vacation(double length) {
  on_vacation_ = true;
  band_vacation_.push(length);
}

void BandServer::end_vacation() { on_vacation_ = false; }

BandStats BandServer::estimate_stats(std::uint32_t flow, VacationMode mode, std::size_t min_samples) const {
  const auto& vacations = mode == VacationMode::kParametric ? band_vacation_ : vacation_.at(flow);
  return estimate_band_stats(service_.at(flow), vacations, min_samples);
}

}  // namespace bandsplit
