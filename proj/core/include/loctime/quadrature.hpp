#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace loctime {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_bound = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_evaluations = 2'000'000;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b]. The
/// reported bound is the sum over panels of |K15 - G7|, which overstates the
/// true error of the K15 estimate for smooth integrands.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Same, with the interval split at the given sorted breakpoints
/// (breaks.front() and breaks.back() are the end points).
QuadratureResult integrate(const Integrand& f, std::span<const double> breaks,
                           const QuadratureOptions& opts = {});

}  // namespace loctime
