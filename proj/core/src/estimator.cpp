#include "bandsplit/estimator.hpp"

#include <algorithm>
#include <sstream>

#include "bandsplit/error.hpp"

namespace bandsplit {

MomentEstimator::MomentEstimator(std::size_t window) : ring_(window == 0 ? 1 : window, 0.0) {}

void MomentEstimator::push(double sample) {
  if (filled_ == ring_.size()) {
    const double old = ring_[next_];
    sum_ -= old;
    sum_sq_ -= old * old;
  } else {
    ++filled_;
  }
  ring_[next_] = sample;
  sum_ += sample;
  sum_sq_ += sample * sample;
  next_ = (next_ + 1) % ring_.size();
  // Running add/subtract drifts; rebuild once per window turnover.
  if (++since_resum_ >= ring_.size()) resum();
}

void MomentEstimator::resum() {
  sum_ = 0.0;
  sum_sq_ = 0.0;
  for (std::size_t i = 0; i < filled_; ++i) {
    sum_ += ring_[i];
    sum_sq_ += ring_[i] * ring_[i];
  }
  since_resum_ = 0;
}

double MomentEstimator::mean() const {
  return filled_ == 0 ? 0.0 : sum_ / static_cast<double>(filled_);
}

double MomentEstimator::mean_square() const {
  return filled_ == 0 ? 0.0 : sum_sq_ / static_cast<double>(filled_);
}

BandStats estimate_band_stats(const MomentEstimator& service, const MomentEstimator& vacation,
                              std::size_t min_samples) {
  if (service.count() < min_samples || vacation.count() < min_samples) {
    std::ostringstream os;
    os << service.count() << " service / " << vacation.count() << " vacation samples, need "
       << min_samples;
    throw Error(ErrorCode::kInsufficientSamples, os.str());
  }
  BandStats stats;
  stats.mu = 1.0 / service.mean();
  stats.x2 = std::max(service.mean_square(), 1.0 / (stats.mu * stats.mu));
  stats.vbar = vacation.mean();
  stats.v2 = vacation.mean_square();
  if (stats.vbar <= 0.0) {
    stats.vbar = 0.0;
    stats.v2 = 0.0;
  } else {
    stats.v2 = std::max(stats.v2, stats.vbar * stats.vbar);
  }
  validate(stats);
  return stats;
}

}  // namespace bandsplit
