#include "bandsplit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bandsplit/error.hpp"

namespace bandsplit {

Simulator::Simulator(ScenarioConfig config, SchedulerSpec scheduler, std::uint64_t seed)
    : config_(std::move(config)), scheduler_spec_(scheduler), seed_(seed) {
  validate(config_);
  const std::size_t m = config_.num_bands();
  if (scheduler_spec_.kind == SchedulerKind::kSingleBand && scheduler_spec_.band >= m) {
    throw Error(ErrorCode::kConfigInvalid, "scheduler single_band index out of range");
  }

  std::vector<FlowKey> keys;
  for (const auto& f : config_.flows) keys.push_back(f.key);
  for (std::size_t j = 0; j < m; ++j) {
    servers_.push_back(std::make_unique<BandServer>(keys, config_.ac_priority, config_.estimator_window));
    bands_.push_back(BandState{DurationSampler(config_.bands[j].service),
                               make_stream(seed_, "service/" + std::to_string(j)),
                               make_stream(seed_, "vacation/" + std::to_string(j)),
                               {}});
  }
  if (config_.vacation_mode == VacationMode::kParametric) {
    vacation_sampler_ = std::make_unique<DurationSampler>(config_.vacation);
  }

  SchedulerOptions options;
  options.optimizer.stability_margin = config_.stability_margin;
  options.token_increment = config_.token_increment;
  options.batch_size = config_.batch_size;
  const auto nominal = nominal_stats(config_);
  for (std::size_t f = 0; f < config_.flows.size(); ++f) {
    const auto& fc = config_.flows[f];
    FlowState state{make_scheduler(scheduler_spec_, nominal, fc.lambda, options),
                    config_.mask_for(f),
                    make_stream(seed_, "arrival/" + std::to_string(f)),
                    0,
                    0,
                    static_cast<std::uint64_t>(std::floor(config_.warmup_frac * static_cast<double>(fc.packets))),
                    ReorderBuffer(0)};
    flows_.push_back(std::move(state));
    total_packets_ += fc.packets;
  }
  band_count_.assign(m, 0);
  band_delay_sum_.assign(m, 0.0);
}

Simulator::~Simulator() = default;

void Simulator::schedule(double time, EventType type, std::uint32_t target) {
  int priority = 0;
  if (type == EventType::kArrival) priority = 1;
  if (type == EventType::kFeedback) priority = 2;
  events_.push(Event{time, priority, event_order_++, type, target});
}

MetricsReport Simulator::run() {
  if (ran_) throw Error(ErrorCode::kConfigInvalid, "a Simulator instance runs once");
  ran_ = true;

  for (std::uint32_t f = 0; f < flows_.size(); ++f) {
    std::exponential_distribution<double> gap(config_.flows[f].lambda);
    schedule(gap(flows_[f].arrivals), EventType::kArrival, f);
  }
  if (config_.vacation_mode == VacationMode::kParametric) {
    for (std::uint32_t j = 0; j < servers_.size(); ++j) start_vacation(j);
  }

  while (!events_.empty() && delivered_ < total_packets_) {
    const Event ev = events_.top();
    if (config_.max_sim_time_s > 0.0 && ev.time > config_.max_sim_time_s) break;
    events_.pop();
    now_ = ev.time;
    switch (ev.type) {
      case EventType::kArrival: on_arrival(ev.target); break;
      case EventType::kServiceEnd: on_service_end(ev.target); break;
      case EventType::kVacationEnd: on_vacation_end(ev.target); break;
      case EventType::kReceive: on_receive(ev.target); break;
      case EventType::kFeedback: on_feedback(ev.target); break;
    }
  }
  return summarize();
}

void Simulator::on_arrival(std::uint32_t flow) {
  auto& fs = flows_[flow];
  const auto& fc = config_.flows[flow];
  Packet pkt;
  pkt.seq = fs.next_seq++;
  pkt.flow = flow;
  pkt.created_at = now_;
  pkt.band = fs.scheduler->next_band(pkt, fs.mask);
  ++generated_;

  auto& server = *servers_[pkt.band];
  server.enqueue(pkt);
  if (server.queued() > config_.queue_cap) {
    throw Error(ErrorCode::kOverloadDetected,
                "band " + std::to_string(pkt.band) + " queue exceeds " + std::to_string(config_.queue_cap));
  }
  try_start(pkt.band);

  if (fs.next_seq < fc.packets) {
    std::exponential_distribution<double> gap(fc.lambda);
    schedule(now_ + gap(fs.arrivals), EventType::kArrival, flow);
  }
}

void Simulator::try_start(std::uint32_t band) {
  auto& server = *servers_[band];
  if (!server.idle() || !server.has_waiting()) return;
  auto& bs = bands_[band];
  const double service_time = bs.service(bs.service_rng);
  server.start_service(now_, service_time);
  schedule(now_ + service_time, EventType::kServiceEnd, band);
}

void Simulator::start_vacation(std::uint32_t band) {
  const double length = (*vacation_sampler_)(bands_[band].vacation_rng);
  servers_[band]->begin_vacation(length);
  schedule(now_ + length, EventType::kVacationEnd, band);
}

void Simulator::on_service_end(std::uint32_t band) {
  auto& server = *servers_[band];
  Packet pkt = server.finish_service(now_);
  auto& bs = bands_[band];
  bs.in_transit.push_back(pkt);
  schedule(now_ + config_.bands[band].prop_latency_s, EventType::kReceive, band);

  auto& fs = flows_[pkt.flow];
  if (++fs.served % config_.feedback_interval == 0) schedule(now_, EventType::kFeedback, pkt.flow);

  if (server.has_waiting()) {
    try_start(band);
  } else if (config_.vacation_mode == VacationMode::kParametric) {
    start_vacation(band);
  }
}

void Simulator::on_vacation_end(std::uint32_t band) {
  auto& server = *servers_[band];
  server.end_vacation();
  if (server.has_waiting()) {
    try_start(band);
  } else {
    start_vacation(band);
  }
}

void Simulator::on_receive(std::uint32_t band) {
  auto& transit = bands_[band].in_transit;
  Packet pkt = transit.front();
  transit.pop_front();
  auto& fs = flows_[pkt.flow];
  pkt.out_of_order = fs.receiver.would_wait(pkt.seq);
  for (const auto& released : fs.receiver.push(pkt, now_)) record_release(released);
}

void Simulator::on_feedback(std::uint32_t flow) {
  auto& fs = flows_[flow];
  std::vector<BandStats> stats = fs.scheduler->stats();
  for (std::uint32_t j = 0; j < servers_.size(); ++j) {
    try {
      stats[j] = servers_[j]->estimate_stats(flow, config_.vacation_mode, config_.min_samples);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientSamples && e.code() != ErrorCode::kInvalidStats) throw;
    }
  }
  try {
    fs.scheduler->update_feedback(stats, config_.flows[flow].lambda);
  } catch (const Error&) {
    // Scheduler keeps its previous rates.
  }
}

void Simulator::record_release(const Packet& pkt) {
  ++delivered_;
  if (observer_) observer_(pkt);
  if (pkt.seq < flows_[pkt.flow].warmup) return;

  if (measured_ == 0 || pkt.created_at < first_measured_created_) first_measured_created_ = pkt.created_at;
  ++measured_;
  last_release_ = std::max(last_release_, pkt.released_at);
  const double latency = pkt.released_at - pkt.created_at;
  const double reseq = pkt.released_at - pkt.received_at;
  latency_sum_ += latency;
  latencies_.push_back(latency);
  reseq_sum_ += reseq;
  reseq_max_ = std::max(reseq_max_, reseq);
  wait_sum_ += pkt.service_start - pkt.created_at;
  sojourn_sum_ += pkt.service_end - pkt.created_at;
  if (pkt.out_of_order) ++out_of_order_;
  ++band_count_[pkt.band];
  band_delay_sum_[pkt.band] += pkt.received_at - pkt.created_at;
}

MetricsReport Simulator::summarize() const {
  MetricsReport r;
  r.generated = generated_;
  r.delivered = delivered_;
  for (const auto& s : servers_) {
    r.queued += s->queued();
    if (s->busy()) ++r.in_flight;
  }
  for (const auto& b : bands_) r.in_flight += b.in_transit.size();
  for (const auto& f : flows_) r.in_flight += f.receiver.held();
  r.measured = measured_;
  r.sim_time_s = now_;

  const std::size_t m = servers_.size();
  r.per_band_frac.assign(m, 0.0);
  r.per_band_mean_delay.assign(m, 0.0);
  if (measured_ == 0) return r;

  const auto n = static_cast<double>(measured_);
  const double span = last_release_ - first_measured_created_;
  r.goodput_pps = span > 0.0 ? n / span : 0.0;
  r.mean_latency_s = latency_sum_ / n;
  r.mean_reseq_delay_s = reseq_sum_ / n;
  r.max_reseq_delay_s = reseq_max_;
  r.out_of_order_frac = static_cast<double>(out_of_order_) / n;
  r.mean_wait_s = wait_sum_ / n;
  r.mean_sojourn_s = sojourn_sum_ / n;

  auto sorted = latencies_;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n)) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
  r.p95_latency_s = sorted[rank];

  for (std::size_t j = 0; j < m; ++j) {
    r.per_band_frac[j] = static_cast<double>(band_count_[j]) / n;
    if (band_count_[j] > 0) r.per_band_mean_delay[j] = band_delay_sum_[j] / static_cast<double>(band_count_[j]);
  }
  return r;
}

MetricsReport simulate(const ScenarioConfig& config, const SchedulerSpec& scheduler, std::uint64_t seed) {
  Simulator sim(config, scheduler, seed);
  return sim.run();
}

}  // namespace bandsplit
