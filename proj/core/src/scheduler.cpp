#include "bandsplit/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bandsplit/error.hpp"

namespace bandsplit {

namespace {

void require_mask(const AvailabilityMask& mask, std::size_t num_bands) {
  if (mask.size() != num_bands) {
    throw Error(ErrorCode::kLengthMismatch, "availability mask length differs from band count");
  }
  if (!mask.any()) throw Error(ErrorCode::kNoAvailableBand, "every band is masked");
}

// First available band strictly after `last`, wrapping around.
std::uint32_t next_round_robin(std::uint32_t last, const AvailabilityMask& mask) {
  const auto m = static_cast<std::uint32_t>(mask.size());
  std::uint32_t j = last == kNoBand ? 0 : (last + 1) % m;
  for (std::uint32_t step = 0; step < m; ++step, j = (j + 1) % m) {
    if (mask[j]) return j;
  }
  throw Error(ErrorCode::kNoAvailableBand, "every band is masked");
}

}  // namespace

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kSingleBand: return "single_band";
    case SchedulerKind::kEvenSplit: return "even_split";
    case SchedulerKind::kLoadBalancing: return "load_balancing";
    case SchedulerKind::kBandPerFlow: return "band_per_flow";
    case SchedulerKind::kMinimumDelay: return "minimum_delay";
    case SchedulerKind::kLeakyBucket: return "leaky_bucket";
  }
  return "unknown";
}

std::string SchedulerSpec::name() const {
  std::string out(to_string(kind));
  if (kind == SchedulerKind::kSingleBand) out += ":" + std::to_string(band);
  return out;
}

SchedulerSpec SchedulerSpec::parse(std::string_view name) {
  constexpr std::string_view kSingle = "single_band";
  if (name.starts_with(kSingle)) {
    auto rest = name.substr(kSingle.size());
    if (rest.empty()) return {SchedulerKind::kSingleBand, 0};
    if (rest.front() == ':' && rest.size() > 1 &&
        std::all_of(rest.begin() + 1, rest.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        rest.size() <= 10) {
      return {SchedulerKind::kSingleBand, static_cast<std::uint32_t>(std::stoul(std::string(rest.substr(1))))};
    }
  }
  for (auto kind : {SchedulerKind::kEvenSplit, SchedulerKind::kLoadBalancing, SchedulerKind::kBandPerFlow,
                    SchedulerKind::kMinimumDelay, SchedulerKind::kLeakyBucket}) {
    if (name == to_string(kind)) return {kind, 0};
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown scheduler '" + std::string(name) + "'");
}

std::vector<SchedulerSpec> all_schedulers(std::size_t num_bands) {
  std::vector<SchedulerSpec> out;
  for (std::size_t j = 0; j < num_bands; ++j) {
    out.push_back({SchedulerKind::kSingleBand, static_cast<std::uint32_t>(j)});
  }
  for (auto kind : {SchedulerKind::kEvenSplit, SchedulerKind::kLoadBalancing, SchedulerKind::kBandPerFlow,
                    SchedulerKind::kMinimumDelay, SchedulerKind::kLeakyBucket}) {
    out.push_back({kind, 0});
  }
  return out;
}

bool AvailabilityMask::any() const {
  return std::find(bits.begin(), bits.end(), true) != bits.end();
}

AvailabilityMask update_availability(const AvailabilityMask& mask, std::vector<bool> bits) {
  if (bits.size() != mask.size()) {
    throw Error(ErrorCode::kLengthMismatch, "availability update changes band count");
  }
  AvailabilityMask next{std::move(bits)};
  if (!next.any()) throw Error(ErrorCode::kAllBandsUnavailable, "availability update masks every band");
  return next;
}

std::string_view to_string(TokenIncrement mode) {
  return mode == TokenIncrement::kShare ? "share" : "utilization";
}

TokenIncrement token_increment_from_string(std::string_view name) {
  if (name == "share") return TokenIncrement::kShare;
  if (name == "utilization") return TokenIncrement::kUtilization;
  throw Error(ErrorCode::kConfigInvalid, "unknown token increment '" + std::string(name) + "'");
}

std::vector<std::uint64_t> apportion(std::span<const double> shares, std::uint64_t total) {
  const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  std::vector<std::uint64_t> counts(shares.size(), 0);
  if (!(sum > 0.0) || total == 0) return counts;
  std::vector<double> remainder(shares.size());
  std::uint64_t given = 0;
  for (std::size_t j = 0; j < shares.size(); ++j) {
    const double exact = shares[j] / sum * static_cast<double>(total);
    counts[j] = static_cast<std::uint64_t>(std::floor(exact));
    remainder[j] = exact - std::floor(exact);
    given += counts[j];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; given < total && k < order.size(); ++k) {
    if (shares[order[k]] <= 0.0) continue;
    ++counts[order[k]];
    ++given;
  }
  return counts;
}

// ---------------------------------------------------------------------------

TokenState::TokenState(std::vector<double> increments)
    : tokens_(increments.size(), 0.0), increments_(std::move(increments)) {}

void TokenState::set_increments(std::vector<double> increments) {
  if (increments.size() != tokens_.size()) tokens_.assign(increments.size(), 0.0);
  increments_ = std::move(increments);
}

std::uint32_t TokenState::select(const AvailabilityMask& mask) {
  require_mask(mask, tokens_.size());
  const std::size_t m = tokens_.size();
  bool can_grow = false;
  for (std::size_t j = 0; j < m; ++j) can_grow = can_grow || (mask[j] && increments_[j] > 0.0);

  auto any_full = [&] {
    for (std::size_t j = 0; j < m; ++j) {
      if (mask[j] && tokens_[j] >= 1.0 - kEpsilon) return true;
    }
    return false;
  };
  while (!any_full()) {
    if (!can_grow) throw Error(ErrorCode::kNoAvailableBand, "no available band has a token increment");
    for (std::size_t j = 0; j < m; ++j) {
      if (mask[j]) tokens_[j] += increments_[j];
    }
  }
  std::uint32_t best = kNoBand;
  for (std::size_t j = 0; j < m; ++j) {
    if (!mask[j]) continue;
    if (best == kNoBand || tokens_[j] > tokens_[best]) best = static_cast<std::uint32_t>(j);
  }
  tokens_[best] -= 1.0;
  return best;
}

// ---------------------------------------------------------------------------

BandScheduler::BandScheduler(std::vector<BandStats> stats, double lambda_total)
    : stats_(std::move(stats)), lambda_total_(lambda_total) {
  if (stats_.empty()) throw Error(ErrorCode::kLengthMismatch, "scheduler needs at least one band");
  for (const auto& s : stats_) validate(s);
}

std::uint32_t BandScheduler::next_band(const Packet& pkt, const AvailabilityMask& mask) {
  require_mask(mask, stats_.size());
  return pick(pkt, mask);
}

void BandScheduler::update_feedback(std::span<const BandStats> stats, double lambda_total) {
  if (stats.size() != stats_.size()) {
    throw Error(ErrorCode::kLengthMismatch, "feedback band count differs");
  }
  for (const auto& s : stats) validate(s);
  auto previous_stats = stats_;
  const double previous_lambda = lambda_total_;
  stats_.assign(stats.begin(), stats.end());
  lambda_total_ = lambda_total;
  try {
    on_feedback();
  } catch (...) {
    stats_ = std::move(previous_stats);
    lambda_total_ = previous_lambda;
    throw;
  }
}

SingleBandScheduler::SingleBandScheduler(std::uint32_t band, std::vector<BandStats> stats, double lambda_total)
    : BandScheduler(std::move(stats), lambda_total), band_(band) {
  if (band_ >= stats_.size()) throw Error(ErrorCode::kConfigInvalid, "single_band index out of range");
}

std::uint32_t SingleBandScheduler::pick(const Packet&, const AvailabilityMask& mask) {
  if (!mask[band_]) {
    throw Error(ErrorCode::kNoAvailableBand, "band " + std::to_string(band_) + " is masked");
  }
  return band_;
}

std::uint32_t EvenSplitScheduler::pick(const Packet&, const AvailabilityMask& mask) {
  last_ = next_round_robin(last_, mask);
  return last_;
}

LoadBalancingScheduler::LoadBalancingScheduler(std::vector<BandStats> stats, double lambda_total)
    : BandScheduler(std::move(stats), lambda_total), assigned_(stats_.size(), 0) {
  for (const auto& s : stats_) mus_.push_back(s.mu);
}

// Counts restart whenever the rate snapshot moves; otherwise a small change
// in mu would be paid back as a burst to one band.
void LoadBalancingScheduler::on_feedback() {
  std::vector<double> mus;
  for (const auto& s : stats_) mus.push_back(s.mu);
  if (mus == mus_) return;
  mus_ = std::move(mus);
  std::fill(assigned_.begin(), assigned_.end(), 0);
}

std::uint32_t LoadBalancingScheduler::pick(const Packet&, const AvailabilityMask& mask) {
  std::uint32_t best = kNoBand;
  double best_load = 0.0;
  for (std::size_t j = 0; j < stats_.size(); ++j) {
    if (!mask[j]) continue;
    const double load = static_cast<double>(assigned_[j]) / mus_[j];
    if (best == kNoBand || load < best_load) {
      best = static_cast<std::uint32_t>(j);
      best_load = load;
    }
  }
  ++assigned_[best];
  return best;
}

std::uint32_t BandPerFlowScheduler::pick(const Packet& pkt, const AvailabilityMask& mask) {
  auto it = assignment_.find(pkt.flow);
  if (it != assignment_.end() && mask[it->second]) return it->second;
  // Each flow owns its scheduler instance, so spread flows by index rather
  // than by a per-instance rotation.
  std::vector<std::uint32_t> available;
  for (std::uint32_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) available.push_back(j);
  }
  const auto band = available[pkt.flow % available.size()];
  assignment_[pkt.flow] = band;
  return band;
}

// ---------------------------------------------------------------------------

OptimizedScheduler::OptimizedScheduler(std::vector<BandStats> stats, double lambda_total,
                                       const SchedulerOptions& options)
    : BandScheduler(std::move(stats), lambda_total), options_(options) {
  solved_mask_ = AvailabilityMask::all(stats_.size());
  target_ = solve_for(solved_mask_);
}

std::vector<double> OptimizedScheduler::solve_for(const AvailabilityMask& mask) const {
  std::vector<BandStats> subset;
  std::vector<std::size_t> index;
  for (std::size_t j = 0; j < stats_.size(); ++j) {
    if (mask[j]) {
      subset.push_back(stats_[j]);
      index.push_back(j);
    }
  }
  std::vector<double> rates(stats_.size(), 0.0);
  try {
    const auto sol = solve_closed_form(lambda_total_, subset, options_.optimizer);
    for (std::size_t k = 0; k < index.size(); ++k) rates[index[k]] = sol.alloc.lambdas[k];
  } catch (const Error& e) {
    throw Error(ErrorCode::kOptimizerFailure, e.what());
  }
  return rates;
}

void OptimizedScheduler::ensure_targets(const AvailabilityMask& mask) {
  if (mask == solved_mask_) return;
  target_ = solve_for(mask);
  solved_mask_ = mask;
  on_targets_changed();
}

void OptimizedScheduler::on_feedback() {
  auto rates = solve_for(solved_mask_);
  if (rates == target_) return;
  target_ = std::move(rates);
  on_targets_changed();
}

MinimumDelayScheduler::MinimumDelayScheduler(std::vector<BandStats> stats, double lambda_total,
                                             const SchedulerOptions& options)
    : OptimizedScheduler(std::move(stats), lambda_total, options), assigned_(stats_.size(), 0) {
  if (options_.batch_size == 0) throw Error(ErrorCode::kConfigInvalid, "batch size must be positive");
}

void MinimumDelayScheduler::on_targets_changed() {
  batch_.clear();
  std::fill(assigned_.begin(), assigned_.end(), 0);
  scheduled_ = 0;
}

// Cumulative largest-remainder apportionment keeps the long-run split exact;
// within a batch the packets go out band by band in arrival order.
void MinimumDelayScheduler::refill() {
  const std::uint64_t next_total = scheduled_ + options_.batch_size;
  const auto cumulative = apportion(target_rates(), next_total);
  for (std::size_t j = 0; j < cumulative.size(); ++j) {
    const std::uint64_t quota = cumulative[j] > assigned_[j] ? cumulative[j] - assigned_[j] : 0;
    batch_.insert(batch_.end(), quota, static_cast<std::uint32_t>(j));
    assigned_[j] += quota;
  }
  scheduled_ = next_total;
}

std::uint32_t MinimumDelayScheduler::pick(const Packet&, const AvailabilityMask& mask) {
  ensure_targets(mask);
  while (batch_.empty()) refill();
  const auto band = batch_.front();
  batch_.pop_front();
  return band;
}

LeakyBucketScheduler::LeakyBucketScheduler(std::vector<BandStats> stats, double lambda_total,
                                           const SchedulerOptions& options)
    : OptimizedScheduler(std::move(stats), lambda_total, options), tokens_(std::vector<double>(stats_.size(), 0.0)) {
  on_targets_changed();
}

void LeakyBucketScheduler::on_targets_changed() {
  const auto& target = target_rates();
  std::vector<double> increments(target.size());
  for (std::size_t j = 0; j < target.size(); ++j) {
    increments[j] = options_.token_increment == TokenIncrement::kShare ? target[j] / lambda_total_
                                                                       : target[j] / stats_[j].mu;
  }
  tokens_.set_increments(std::move(increments));
}

std::uint32_t LeakyBucketScheduler::pick(const Packet&, const AvailabilityMask& mask) {
  ensure_targets(mask);
  return tokens_.select(mask);
}

std::unique_ptr<BandScheduler> make_scheduler(const SchedulerSpec& spec, std::vector<BandStats> stats,
                                              double lambda_total, const SchedulerOptions& options) {
  switch (spec.kind) {
    case SchedulerKind::kSingleBand:
      return std::make_unique<SingleBandScheduler>(spec.band, std::move(stats), lambda_total);
    case SchedulerKind::kEvenSplit: return std::make_unique<EvenSplitScheduler>(std::move(stats), lambda_total);
    case SchedulerKind::kLoadBalancing:
      return std::make_unique<LoadBalancingScheduler>(std::move(stats), lambda_total);
    case SchedulerKind::kBandPerFlow:
      return std::make_unique<BandPerFlowScheduler>(std::move(stats), lambda_total);
    case SchedulerKind::kMinimumDelay:
      return std::make_unique<MinimumDelayScheduler>(std::move(stats), lambda_total, options);
    case SchedulerKind::kLeakyBucket:
      return std::make_unique<LeakyBucketScheduler>(std::move(stats), lambda_total, options);
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown scheduler kind");
}

}  // namespace bandsplit
