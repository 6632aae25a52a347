#pragma once

#include <array>
#include <span>

#include "loctime/quadrature.hpp"

namespace loctime {

/// Killing rate and lag for the potential-density estimates; 0 < h <= 1.
struct PotentialParams {
  double alpha = 0.5;
  double h = 0.1;
  void validate() const;
};

/// alpha-potential density exp(-sqrt(2 alpha)|x|) / sqrt(2 alpha).
double u_alpha(double x, double alpha);

/// Gaussian density with variance t.
double heat_kernel(double t, double x);

/// f(x + h) - f(x)
template <typename F>
double diff_h(const F& f, double x, double h) {
  return f(x + h) - f(x);
}

/// Delta^h Delta^{-h} f(x) = 2 f(x) - f(x + h) - f(x - h).
template <typename F>
double diff_hh(const F& f, double x, double h) {
  return 2.0 * f(x) - f(x + h) - f(x - h);
}

/// diff_hh(u^alpha, 0, h) in closed form: 2 (1 - e^{-sqrt(2a) h}) / sqrt(2a).
double u_hh_at_zero(double alpha, double h);

/// int (Delta^h Delta^{-h} u^alpha(x))^q dx over R, or over |x| >= h.
QuadratureResult integral_w_power(double alpha, double h, int q,
                                  bool restrict_abs_ge_h = false);

/// int prod_i Delta^h Delta^{-h} u^{alpha_i}(x) dx.
QuadratureResult integral_w_power_multi(std::span<const double> alphas,
                                        double h);

enum class HeatMode { plain, diff_h, diff_hh };

/// int_0^T g_t(x) dt with g = p_t, Delta^h p_t or Delta^h Delta^{-h} p_t.
/// With absolute = true the integrand is |g_t(x)|. T may be +infinity for the
/// diff_hh mode only. The t = s^2 substitution removes the t^{-1/2}
/// singularity at the origin.
QuadratureResult heat_kernel_time_integral(
    double x, double T, HeatMode mode, double h = 0.0, bool absolute = false,
    const QuadratureOptions& opts = {1e-16, 1e-11, 400'000});

/// int_0^infinity e^{-alpha t} p_t(x) dt by quadrature (t = s^2).
QuadratureResult heat_kernel_laplace(double x, double alpha);

enum class TimeUpper { infinity, h };

/// int (int_0^upper Delta^h Delta^{-h} p_t(x) dt)^q dx by two routes.
struct HeatDiffPowerResult {
  QuadratureResult direct;   // nested quadrature in (x, t)
  QuadratureResult fourier;  // frequency-domain representation
  double relative_gap() const;
};

HeatDiffPowerResult integral_heat_diff_power(double h, int q, TimeUpper upper);

/// Frequency-domain route alone (q in {2, 3}).
QuadratureResult heat_diff_power_fourier(double h, int q, TimeUpper upper);
/// x-space nested quadrature alone (any q >= 2).
QuadratureResult heat_diff_power_direct(double h, int q, TimeUpper upper);

/// Suprema over t in [delta, T] (sampled densely, log-spaced) of
/// p_t(x), |Delta^h p_t(x)| and |Delta^h Delta^{-h} p_t(x)|.
struct HeatSup {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};
HeatSup sup_heat_bounds(double delta, double T, double h, double x);

/// 2^{q+1} / (q + 1), the leading coefficient of the h^{q+1} asymptotics.
double second_difference_coefficient(int q);

}  // namespace loctime
