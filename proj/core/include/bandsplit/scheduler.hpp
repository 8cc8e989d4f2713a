#pragma once

// Per-packet band selection policies. One scheduler instance serves one
// flow and is never shared between threads.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bandsplit/model.hpp"
#include "bandsplit/optimizer.hpp"
#include "bandsplit/packet.hpp"

namespace bandsplit {

enum class SchedulerKind {
  kSingleBand,
  kEvenSplit,
  kLoadBalancing,
  kBandPerFlow,
  kMinimumDelay,
  kLeakyBucket,
};

std::string_view to_string(SchedulerKind kind);

struct SchedulerSpec {
  SchedulerKind kind = SchedulerKind::kLeakyBucket;
  std::uint32_t band = 0;  // only meaningful for kSingleBand

  // "leaky_bucket", "single_band:1", ...
  std::string name() const;
  static SchedulerSpec parse(std::string_view name);

  bool aggregates() const {
    return kind != SchedulerKind::kSingleBand && kind != SchedulerKind::kBandPerFlow;
  }

  friend bool operator==(const SchedulerSpec&, const SchedulerSpec&) = default;
};

// Every policy in its canonical order, with one single_band entry per band.
std::vector<SchedulerSpec> all_schedulers(std::size_t num_bands);

struct AvailabilityMask {
  std::vector<bool> bits;

  static AvailabilityMask all(std::size_t num_bands) { return {std::vector<bool>(num_bands, true)}; }
  bool any() const;
  std::size_t size() const { return bits.size(); }
  bool operator[](std::size_t j) const { return bits[j]; }

  friend bool operator==(const AvailabilityMask&, const AvailabilityMask&) = default;
};

// Replaces the mask. Throws kLengthMismatch or kAllBandsUnavailable.
AvailabilityMask update_availability(const AvailabilityMask& mask, std::vector<bool> bits);

// How leaky-bucket token increments are derived from the optimal rates.
//  kShare:       R_j = lambda_j* / lambda, selection fractions equal the
//                optimal split.
//  kUtilization: R_j = lambda_j* / mu_j, selection fractions are
//                proportional to per-band utilisation.
enum class TokenIncrement { kShare, kUtilization };

std::string_view to_string(TokenIncrement mode);
TokenIncrement token_increment_from_string(std::string_view name);

struct SchedulerOptions {
  OptimizerConfig optimizer;
  TokenIncrement token_increment = TokenIncrement::kShare;
  // Packets apportioned per minimum-delay batch.
  std::size_t batch_size = 100;
};

// Token bank of the leaky-bucket policy.
class TokenState {
 public:
  TokenState() = default;
  explicit TokenState(std::vector<double> increments);

  // Raises all available tokens by their increments until one reaches 1,
  // then debits and returns the fullest available band (lowest index on ties).
  std::uint32_t select(const AvailabilityMask& mask);

  void set_increments(std::vector<double> increments);
  const std::vector<double>& tokens() const { return tokens_; }
  const std::vector<double>& increments() const { return increments_; }

  static constexpr double kEpsilon = 1e-12;

 private:
  std::vector<double> tokens_;
  std::vector<double> increments_;
};

class BandScheduler {
 public:
  BandScheduler(std::vector<BandStats> stats, double lambda_total);
  virtual ~BandScheduler() = default;

  BandScheduler(const BandScheduler&) = delete;
  BandScheduler& operator=(const BandScheduler&) = delete;

  // Picks the band for `pkt`; never returns a masked band. Throws
  // kNoAvailableBand, kLengthMismatch, or kOptimizerFailure.
  std::uint32_t next_band(const Packet& pkt, const AvailabilityMask& mask);

  // Replaces the service statistics snapshot. Optimizing policies re-solve
  // the split; if that fails the error propagates and prior rates are kept.
  void update_feedback(std::span<const BandStats> stats, double lambda_total);

  virtual SchedulerKind kind() const = 0;
  std::size_t num_bands() const { return stats_.size(); }
  const std::vector<BandStats>& stats() const { return stats_; }
  double lambda_total() const { return lambda_total_; }

 protected:
  virtual std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) = 0;
  virtual void on_feedback() {}

  std::vector<BandStats> stats_;
  double lambda_total_;
};

class SingleBandScheduler final : public BandScheduler {
 public:
  SingleBandScheduler(std::uint32_t band, std::vector<BandStats> stats, double lambda_total);
  SchedulerKind kind() const override { return SchedulerKind::kSingleBand; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  std::uint32_t band_;
};

class EvenSplitScheduler final : public BandScheduler {
 public:
  using BandScheduler::BandScheduler;
  SchedulerKind kind() const override { return SchedulerKind::kEvenSplit; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  std::uint32_t last_ = kNoBand;
};

class LoadBalancingScheduler final : public BandScheduler {
 public:
  LoadBalancingScheduler(std::vector<BandStats> stats, double lambda_total);
  SchedulerKind kind() const override { return SchedulerKind::kLoadBalancing; }
  const std::vector<std::uint64_t>& assigned() const { return assigned_; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  void on_feedback() override;

  std::vector<std::uint64_t> assigned_;
  std::vector<double> mus_;
};

// Pins each flow to one band: the (flow index mod n)-th available band.
class BandPerFlowScheduler final : public BandScheduler {
 public:
  using BandScheduler::BandScheduler;
  SchedulerKind kind() const override { return SchedulerKind::kBandPerFlow; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  std::map<std::uint32_t, std::uint32_t> assignment_;
};

// Shared state of the policies driven by the optimal split: the current
// target rates over the available subset of bands.
class OptimizedScheduler : public BandScheduler {
 public:
  OptimizedScheduler(std::vector<BandStats> stats, double lambda_total, const SchedulerOptions& options);

  // Full-length vector; masked bands carry zero.
  const std::vector<double>& target_rates() const { return target_; }
  const AvailabilityMask& solved_mask() const { return solved_mask_; }

 protected:
  // Re-solves when the mask differs from the one the targets were built for.
  void ensure_targets(const AvailabilityMask& mask);
  virtual void on_targets_changed() = 0;

  SchedulerOptions options_;

 private:
  void on_feedback() override;
  std::vector<double> solve_for(const AvailabilityMask& mask) const;

  std::vector<double> target_;
  AvailabilityMask solved_mask_;
};

class MinimumDelayScheduler final : public OptimizedScheduler {
 public:
  MinimumDelayScheduler(std::vector<BandStats> stats, double lambda_total, const SchedulerOptions& options);
  SchedulerKind kind() const override { return SchedulerKind::kMinimumDelay; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  void on_targets_changed() override;
  void refill();

  std::deque<std::uint32_t> batch_;
  std::vector<std::uint64_t> assigned_;
  std::uint64_t scheduled_ = 0;
};

class LeakyBucketScheduler final : public OptimizedScheduler {
 public:
  LeakyBucketScheduler(std::vector<BandStats> stats, double lambda_total, const SchedulerOptions& options);
  SchedulerKind kind() const override { return SchedulerKind::kLeakyBucket; }
  const TokenState& tokens() const { return tokens_; }

 private:
  std::uint32_t pick(const Packet& pkt, const AvailabilityMask& mask) override;
  void on_targets_changed() override;

  TokenState tokens_;
};

std::unique_ptr<BandScheduler> make_scheduler(const SchedulerSpec& spec, std::vector<BandStats> stats,
                                              double lambda_total, const SchedulerOptions& options = {});

// Largest-remainder apportionment of `total` items by `shares` (which need
// not be normalised). Ties go to the lower index.
std::vector<std::uint64_t> apportion(std::span<const double> shares, std::uint64_t total);

}  // namespace bandsplit
