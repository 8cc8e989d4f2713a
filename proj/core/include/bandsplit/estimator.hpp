#pragma once

#include <cstddef>
#include <vector>

#include "bandsplit/model.hpp"

namespace bandsplit {

// Sliding-window first and second moments over the last `window` samples.
class MomentEstimator {
 public:
  explicit MomentEstimator(std::size_t window = 1000);

  void push(double sample);

  std::size_t count() const { return filled_; }
  std::size_t window() const { return ring_.size(); }
  double mean() const;
  double mean_square() const;

 private:
  void resum();

  std::vector<double> ring_;
  std::size_t next_ = 0;
  std::size_t filled_ = 0;
  std::size_t since_resum_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

inline constexpr std::size_t kDefaultMinSamples = 30;

// mu = 1 / mean(service), x2 = mean(service^2), vbar/v2 from the vacation
// window. Throws kInsufficientSamples if either window is short.
BandStats estimate_band_stats(const MomentEstimator& service, const MomentEstimator& vacation,
                              std::size_t min_samples = kDefaultMinSamples);

}  // namespace bandsplit
