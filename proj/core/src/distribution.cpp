#include "bandsplit/distribution.hpp"

#include <cmath>

#include "bandsplit/error.hpp"

namespace bandsplit {

namespace {

// FNV-1a; std::hash is not stable across standard libraries.
std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::kDeterministic: return "deterministic";
    case DistributionKind::kExponential: return "exponential";
    case DistributionKind::kLognormal: return "lognormal";
  }
  return "unknown";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
  if (name == "deterministic") return DistributionKind::kDeterministic;
  if (name == "exponential") return DistributionKind::kExponential;
  if (name == "lognormal") return DistributionKind::kLognormal;
  throw Error(ErrorCode::kConfigInvalid, "unknown distribution kind '" + std::string(name) + "'");
}

DistributionSpec DistributionSpec::deterministic(double mean) {
  return {DistributionKind::kDeterministic, mean, 0.0, 0.0};
}

DistributionSpec DistributionSpec::exponential(double mean) {
  return {DistributionKind::kExponential, mean, 0.0, 0.0};
}

DistributionSpec DistributionSpec::lognormal(double mu_log, double sigma_log) {
  DistributionSpec spec{DistributionKind::kLognormal, 0.0, mu_log, sigma_log};
  spec.mean = spec.first_moment();
  return spec;
}

double DistributionSpec::first_moment() const {
  switch (kind) {
    case DistributionKind::kDeterministic:
    case DistributionKind::kExponential: return mean;
    case DistributionKind::kLognormal: return std::exp(mu_log + 0.5 * sigma_log * sigma_log);
  }
  return 0.0;
}

double DistributionSpec::second_moment() const {
  switch (kind) {
    case DistributionKind::kDeterministic: return mean * mean;
    case DistributionKind::kExponential: return 2.0 * mean * mean;
    case DistributionKind::kLognormal: return std::exp(2.0 * mu_log + 2.0 * sigma_log * sigma_log);
  }
  return 0.0;
}

void validate(const DistributionSpec& spec) {
  if (spec.kind == DistributionKind::kLognormal) {
    if (!std::isfinite(spec.mu_log) || !(spec.sigma_log >= 0.0) || !std::isfinite(spec.sigma_log)) {
      throw Error(ErrorCode::kConfigInvalid, "lognormal needs finite mu_log and sigma_log >= 0");
    }
    return;
  }
  if (!(spec.mean > 0.0) || !std::isfinite(spec.mean)) {
    throw Error(ErrorCode::kConfigInvalid, "distribution mean must be positive");
  }
}

Rng make_stream(std::uint64_t run_seed, std::string_view stream_name) {
  const std::uint64_t tag = fnv1a(stream_name);
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

DurationSampler::DurationSampler(const DistributionSpec& spec)
    : spec_(spec),
      exponential_(spec.kind == DistributionKind::kExponential ? 1.0 / spec.mean : 1.0),
      lognormal_(spec.mu_log, spec.sigma_log) {
  validate(spec);
}

double DurationSampler::operator()(Rng& rng) {
  switch (spec_.kind) {
    case DistributionKind::kDeterministic: return spec_.mean;
    case DistributionKind::kExponential: return exponential_(rng);
    case DistributionKind::kLognormal: return lognormal_(rng);
  }
  return spec_.mean;
}

}  // namespace bandsplit
