#include "loctime/statistics.hpp"

#include <cmath>
#include <string>

#include "loctime/errors.hpp"

namespace loctime {

std::size_t lag_cells(const GridSpec& grid, double h) {
  if (!std::isfinite(h) || h <= 0.0) {
    throw ParameterError("lag h must be finite and > 0");
  }
  const double k = std::round(h / grid.dx);
  if (k < 1.0 || std::fabs(k * grid.dx - h) > 1e-12 * h) {
    throw ParameterError("lag h = " + std::to_string(h) +
                         " is not an integer multiple of dx = " +
                         std::to_string(grid.dx));
  }
  return static_cast<std::size_t>(k);
}

std::vector<double> increment_field(const LocalTimeField& field, double h) {
  const std::size_t k = lag_cells(field.grid, h);
  const std::size_t n = field.values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ahead = i + k < n ? field.values[i + k] : 0.0;
    out[i] = ahead - field.values[i];
  }
  return out;
}

IncrementFunctionals increment_functionals(std::span<const double> v,
                                           const GridSpec& grid, double t,
                                           double h) {
  const std::size_t k = lag_cells(grid, h);
  const std::size_t n = v.size();
  IncrementFunctionals f;
  f.h = h;
  f.t = t;
  // Cells left of the grid have L = 0 but may see L^{x+h} != 0.
  for (std::size_t j = 0; j < k && j < n; ++j) {
    const double d = v[j];
    const double d2 = d * d;
    f.d2 += d2;
    f.d3 += d2 * d;
    f.d4 += d2 * d2;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double l = v[i];
    const double d = (i + k < n ? v[i + k] : 0.0) - l;
    const double d2 = d * d;
    const double l2 = l * l;
    f.d2 += d2;
    f.d3 += d2 * d;
    f.d4 += d2 * d2;
    f.dl += d * l;
    f.d2l += d2 * l;
    f.l2 += l2;
    f.l3 += l2 * l;
    f.l4 += l2 * l2;
  }
  const double dx = grid.dx;
  f.d2 *= dx;
  f.d3 *= dx;
  f.d4 *= dx;
  f.dl *= dx;
  f.d2l *= dx;
  f.l2 *= dx;
  f.l3 *= dx;
  f.l4 *= dx;
  return f;
}

IncrementFunctionals increment_functionals(const LocalTimeField& field,
                                           double h) {
  return increment_functionals(field.values, field.grid, field.t, h);
}

double second_statistic_value(const IncrementFunctionals& f) {
  return (f.d2 - 4.0 * f.h * f.t) / std::pow(f.h, 1.5);
}

double third_statistic_value(const IncrementFunctionals& f) {
  const double h = f.h;
  return (f.d3 - 12.0 * h * f.dl - 24.0 * h * h * f.t) / (h * h);
}

double fourth_statistic_value(const IncrementFunctionals& f,
                              FourthCentering centering) {
  const double h = f.h;
  const double last = centering == FourthCentering::joint
                          ? 48.0 * h * h * (f.l2 - f.dl)
                          : 48.0 * h * h * f.l2 - f.dl;
  return (f.d4 - 24.0 * h * f.d2l + last) / std::pow(h, 2.5);
}

StatisticSample second_moment_statistic(const LocalTimeField& field, double h) {
  const auto f = increment_functionals(field, h);
  return {StatisticKind::second, h, field.t, second_statistic_value(f), f.l2};
}

StatisticSample third_moment_statistic(const LocalTimeField& field, double h) {
  const auto f = increment_functionals(field, h);
  return {StatisticKind::third, h, field.t, third_statistic_value(f), f.l3};
}

StatisticSample fourth_moment_statistic(const LocalTimeField& field, double h,
                                        FourthCentering centering) {
  const auto f = increment_functionals(field, h);
  return {StatisticKind::fourth, h, field.t,
          fourth_statistic_value(f, centering), f.l4};
}

LimitConstant limit_constant(int q) {
  if (q < 2) throw ParameterError("limit_constant requires q >= 2");
  double factorial = 1.0;
  for (int j = 2; j <= q; ++j) factorial *= j;
  const double c2 = std::ldexp(factorial, 2 * q + 1) / (q + 1);
  return {q, std::sqrt(c2)};
}

MomentEstimate mixed_normal_moment(int m, double c,
                                   std::span<const double> alpha_samples) {
  if (m < 1) throw ParameterError("mixed_normal_moment requires m >= 1");
  if (alpha_samples.empty()) {
    throw ParameterError("mixed_normal_moment requires samples");
  }
  if (m % 2 == 1) return {0.0, 0.0, alpha_samples.size(), 0.0};
  const int n = m / 2;
  // (2n)! / (2^n n!) = (2n-1)!!
  double coeff = 1.0;
  for (int j = 2 * n - 1; j > 1; j -= 2) coeff *= j;
  coeff *= std::pow(c, 2 * n);
  std::vector<double> scaled(alpha_samples.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    scaled[i] = coeff * std::pow(alpha_samples[i], n);
  }
  return MomentEstimate::from_samples(scaled);
}

}  // namespace loctime
