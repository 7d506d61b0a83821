#pragma once

#include <cmath>
#include <limits>

namespace wmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sum of positive terms given by their natural logs. Terms are accumulated in linear space
// relative to a reference exponent (Neumaier-compensated), and the reference moves up when a
// much larger term arrives, so neither underflow nor cancellation loss occurs.
class LogAccumulator {
 public:
  void add_log(double log_term) {
    if (log_term == kNegInf) return;
    if (empty()) {
      ref_ = log_term;
      sum_ = 1.0;
      comp_ = 0.0;
      return;
    }
    if (log_term > ref_ + 16.0) {
      const double scale = std::exp(ref_ - log_term);
      sum_ *= scale;
      comp_ *= scale;
      ref_ = log_term;
    }
    const double x = std::exp(log_term - ref_);
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  bool empty() const { return ref_ == kNegInf; }
  /// Natural log of the total; -inf when nothing was added.
  double log_value() const { return empty() ? kNegInf : ref_ + std::log(sum_ + comp_); }
  double value() const { return std::exp(log_value()); }

 private:
  double ref_ = kNegInf;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log2_of_ln(double ln_value) { return ln_value / std::log(2.0); }

}  // namespace wmc
