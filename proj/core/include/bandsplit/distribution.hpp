#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace bandsplit {

enum class DistributionKind { kDeterministic, kExponential, kLognormal };

std::string_view to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(std::string_view name);

// Positive random duration. Deterministic and exponential use `mean`;
// lognormal uses the parameters of the underlying normal.
struct DistributionSpec {
  DistributionKind kind = DistributionKind::kDeterministic;
  double mean = 0.0;
  double mu_log = 0.0;
  double sigma_log = 0.0;

  static DistributionSpec deterministic(double mean);
  static DistributionSpec exponential(double mean);
  static DistributionSpec lognormal(double mu_log, double sigma_log);

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

  double first_moment() const;
  double second_moment() const;
};

void validate(const DistributionSpec& spec);

using Rng = std::mt19937_64;

// Independent generator for one named stochastic source of a run.
Rng make_stream(std::uint64_t run_seed, std::string_view stream_name);

class DurationSampler {
 public:
  explicit DurationSampler(const DistributionSpec& spec);
  double operator()(Rng& rng);

 private:
  DistributionSpec spec_;
  std::exponential_distribution<double> exponential_;
  std::lognormal_distribution<double> lognormal_;
};

}  // namespace bandsplit
