#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "bandsplit/estimator.hpp"
#include "bandsplit/model.hpp"
#include "bandsplit/packet.hpp"
#include "bandsplit/scenario.hpp"

namespace bandsplit {

// One band's MAC: a FIFO per flow, strict priority across access
// categories and round-robin across stations within a category. Serves at
// most one packet at a time and records per-flow service and vacation
// samples.
class BandServer {
 public:
  BandServer(std::vector<FlowKey> flows, const std::vector<std::uint32_t>& ac_priority,
             std::size_t estimator_window);

  void enqueue(const Packet& pkt);

  bool idle() const { return !current_ && !on_vacation_; }
  bool busy() const { return current_.has_value(); }
  bool on_vacation() const { return on_vacation_; }
  bool has_waiting() const { return waiting_ > 0; }
  std::size_t queued() const { return waiting_; }
  std::size_t queued(std::uint32_t flow) const { return queues_[flow].size(); }

  // Pops the next packet by the service discipline and starts it. Requires
  // a waiting packet and an idle server. Returns the flow index served.
  std::uint32_t start_service(double now, double service_time);
  Packet finish_service(double now);
  const std::optional<Packet>& current() const { return current_; }

  void begin_vacation(double length);
  void end_vacation();

  BandStats estimate_stats(std::uint32_t flow, VacationMode mode, std::size_t min_samples) const;

  const MomentEstimator& service_samples(std::uint32_t flow) const { return service_[flow]; }
  const MomentEstimator& vacation_samples(std::uint32_t flow) const { return vacation_[flow]; }
  const MomentEstimator& band_vacations() const { return band_vacation_; }

 private:
  std::uint32_t choose_flow() const;

  std::vector<FlowKey> flows_;
  std::vector<std::deque<Packet>> queues_;
  // Flow indices per priority level (highest first), each ordered by station.
  std::vector<std::vector<std::uint32_t>> levels_;
  std::vector<std::size_t> cursor_;
  std::size_t waiting_ = 0;

  std::optional<Packet> current_;
  double current_service_ = 0.0;
  bool on_vacation_ = false;

  std::vector<double> last_completion_;
  std::vector<MomentEstimator> service_;
  std::vector<MomentEstimator> vacation_;
  MomentEstimator band_vacation_;
};

}  // namespace bandsplit
