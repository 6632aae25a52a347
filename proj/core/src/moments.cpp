#include "loctime/moments.hpp"

#include <cmath>

#include "loctime/errors.hpp"

namespace loctime {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

MomentEstimate MomentEstimate::from_samples(std::span<const double> xs) {
  if (xs.empty()) throw ParameterError("moment estimate needs samples");
  CompensatedSum s1;
  CompensatedSum s2;
  for (double x : xs) {
    s1.add(x);
    s2.add(x * x);
  }
  const double n = static_cast<double>(xs.size());
  const double mean = s1.value() / n;
  // Second pass for the variance; the one-pass formula loses digits when
  // the mean dominates.
  CompensatedSum dev;
  for (double x : xs) dev.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? dev.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), xs.size(), s2.value() / n};
}

double MomentEstimate::variance() const noexcept {
  if (n < 2) return 0.0;
  return std_error * std_error * static_cast<double>(n);
}

}  // namespace loctime
