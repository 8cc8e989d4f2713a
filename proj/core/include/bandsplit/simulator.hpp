#pragma once

// Deterministic discrete-event simulation of one scenario under one
// scheduling policy. A run is single-threaded; independent runs share no
// state and may execute concurrently.

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <vector>

#include "bandsplit/band_server.hpp"
#include "bandsplit/distribution.hpp"
#include "bandsplit/reorder.hpp"
#include "bandsplit/scenario.hpp"
#include "bandsplit/scheduler.hpp"

namespace bandsplit {

class Simulator {
 public:
  using ReleaseObserver = std::function<void(const Packet&)>;

  Simulator(ScenarioConfig config, SchedulerSpec scheduler, std::uint64_t seed);
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Called for every packet the receiver releases, warm-up included.
  void set_release_observer(ReleaseObserver observer) { observer_ = std::move(observer); }

  MetricsReport run();

  const BandServer& band(std::size_t j) const { return *servers_.at(j); }
  const BandScheduler& scheduler(std::size_t flow) const { return *flows_.at(flow).scheduler; }
  double now() const { return now_; }

 private:
  enum class EventType : std::uint8_t { kServiceEnd, kVacationEnd, kReceive, kArrival, kFeedback };

  struct Event {
    double time;
    int priority;  // departures < arrivals < feedback at equal times
    std::uint64_t order;
    EventType type;
    std::uint32_t target;

    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (priority != o.priority) return priority > o.priority;
      return order > o.order;
    }
  };

  struct FlowState {
    std::unique_ptr<BandScheduler> scheduler;
    AvailabilityMask mask;
    Rng arrivals;
    std::uint64_t next_seq = 0;
    std::uint64_t served = 0;
    std::uint64_t warmup = 0;
    ReorderBuffer receiver;
  };

  struct BandState {
    DurationSampler service;
    Rng service_rng;
    Rng vacation_rng;
    std::deque<Packet> in_transit;
  };

  void schedule(double time, EventType type, std::uint32_t target);
  void on_arrival(std::uint32_t flow);
  void on_service_end(std::uint32_t band);
  void on_vacation_end(std::uint32_t band);
  void on_receive(std::uint32_t band);
  void on_feedback(std::uint32_t flow);
  void try_start(std::uint32_t band);
  void start_vacation(std::uint32_t band);
  void record_release(const Packet& pkt);
  MetricsReport summarize() const;

  ScenarioConfig config_;
  SchedulerSpec scheduler_spec_;
  std::uint64_t seed_;

  std::vector<std::unique_ptr<BandServer>> servers_;
  std::vector<BandState> bands_;
  std::vector<FlowState> flows_;
  std::unique_ptr<DurationSampler> vacation_sampler_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t event_order_ = 0;
  double now_ = 0.0;

  std::uint64_t total_packets_ = 0;
  std::uint64_t generated_ = 0;
  std::uint64_t delivered_ = 0;

  // Measurement window (post warm-up) accumulators.
  std::uint64_t measured_ = 0;
  std::uint64_t out_of_order_ = 0;
  double latency_sum_ = 0.0;
  double reseq_sum_ = 0.0;
  double reseq_max_ = 0.0;
  double wait_sum_ = 0.0;
  double sojourn_sum_ = 0.0;
  double first_measured_created_ = 0.0;
  double last_release_ = 0.0;
  std::vector<double> latencies_;
  std::vector<std::uint64_t> band_count_;
  std::vector<double> band_delay_sum_;

  ReleaseObserver observer_;
  bool ran_ = false;
};

MetricsReport simulate(const ScenarioConfig& config, const SchedulerSpec& scheduler, std::uint64_t seed);

}  // namespace bandsplit
