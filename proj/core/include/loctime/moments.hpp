#pragma once

#include <cstddef>
#include <span>

namespace loctime {

/// Monte Carlo scalar: sample mean with standard error sd / sqrt(n).
struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double raw_second_moment = 0.0;  // mean of x^2

  static MomentEstimate from_samples(std::span<const double> xs);
  /// Sample variance (n - 1 denominator).
  double variance() const noexcept;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace loctime
