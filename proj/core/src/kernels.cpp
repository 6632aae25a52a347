#include "loctime/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "loctime/errors.hpp"

namespace loctime {
namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

void require_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw ParameterError("killing rate alpha must be finite and > 0");
  }
}

// 2 s p_{s^2}(x): the t = s^2 Jacobian folded into the Gaussian density.
double weighted_density(double s, double x) {
  if (s == 0.0) return x == 0.0 ? 2.0 * kInvSqrt2Pi : 0.0;
  return 2.0 * kInvSqrt2Pi * std::exp(-x * x / (2.0 * s * s));
}

double stencil(HeatMode mode, double s, double x, double h) {
  switch (mode) {
    case HeatMode::plain:
      return weighted_density(s, x);
    case HeatMode::diff_h:
      return weighted_density(s, x + h) - weighted_density(s, x);
    case HeatMode::diff_hh:
      return 2.0 * weighted_density(s, x) - weighted_density(s, x + h) -
             weighted_density(s, x - h);
  }
  return 0.0;
}

std::vector<double> sorted_breaks(std::vector<double> pts, double lo,
                                  double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::erase_if(pts, [&](double p) { return !(p >= lo && p <= hi); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// sin^2(p/2) / p^2, continuous at 0.
double sinc_half_sq(double p) {
  if (std::fabs(p) < 1e-4) return 0.25 - p * p / 48.0;
  const double s = std::sin(0.5 * p);
  return s * s / (p * p);
}

double time_cutoff(double p, double h, TimeUpper upper) {
  return upper == TimeUpper::infinity ? 1.0 : -std::expm1(-p * p / (2.0 * h));
}

// Truncation point where |integrand| falls below 1e-17 of its value at 0;
// the integrand decays like exp(-rate x) beyond h.
template <typename F>
double exponential_tail_cutoff(const F& integrand, double h, double rate) {
  const double peak = std::fabs(integrand(0.0));
  double x = h + 1.0 / rate;
  while (std::fabs(integrand(x)) > 1e-17 * peak && x < 1e4) x += 1.0 / rate;
  return x;
}

}  // namespace

void PotentialParams::validate() const {
  require_alpha(alpha);
  if (!(h > 0.0 && h <= 1.0)) {
    throw ParameterError("lag h must lie in (0, 1]");
  }
}

double u_alpha(double x, double alpha) {
  require_alpha(alpha);
  const double r = std::sqrt(2.0 * alpha);
  return std::exp(-r * std::fabs(x)) / r;
}

double heat_kernel(double t, double x) {
  if (!std::isfinite(t) || t <= 0.0) {
    throw ParameterError("heat kernel requires t > 0");
  }
  return kInvSqrt2Pi / std::sqrt(t) * std::exp(-x * x / (2.0 * t));
}

double u_hh_at_zero(double alpha, double h) {
  PotentialParams{alpha, h}.validate();
  const double r = std::sqrt(2.0 * alpha);
  return -2.0 * std::expm1(-r * h) / r;
}

double second_difference_coefficient(int q) {
  return std::ldexp(1.0, q + 1) / (q + 1);
}

QuadratureResult integral_w_power(double alpha, double h, int q,
                                  bool restrict_abs_ge_h) {
  PotentialParams{alpha, h}.validate();
  if (q < 1) throw ParameterError("integral_w_power requires q >= 1");
  auto u = [alpha](double x) { return u_alpha(x, alpha); };
  auto integrand = [&](double x) {
    return std::pow(diff_hh(u, x, h), q);
  };
  const double cutoff =
      exponential_tail_cutoff(integrand, h, std::sqrt(2.0 * alpha));
  std::vector<double> breaks = restrict_abs_ge_h
                                   ? sorted_breaks({}, h, cutoff)
                                   : sorted_breaks({h}, 0.0, cutoff);
  QuadratureOptions opts;
  opts.abs_tol = 1e-7 * std::pow(h, q + 1);
  opts.rel_tol = 1e-12;
  auto half = integrate(integrand, breaks, opts);
  return {2.0 * half.value, 2.0 * half.abs_error_bound, half.evaluations};
}

QuadratureResult integral_w_power_multi(std::span<const double> alphas,
                                        double h) {
  if (alphas.empty()) throw ParameterError("need at least one alpha");
  double slowest = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    PotentialParams{a, h}.validate();
    slowest = std::min(slowest, std::sqrt(2.0 * a));
  }
  auto integrand = [&](double x) {
    double prod = 1.0;
    for (double a : alphas) {
      prod *= diff_hh([a](double y) { return u_alpha(y, a); }, x, h);
    }
    return prod;
  };
  const double cutoff = exponential_tail_cutoff(integrand, h, slowest);
  const auto breaks = sorted_breaks({h}, 0.0, cutoff);
  QuadratureOptions opts;
  opts.abs_tol = 1e-7 * std::pow(h, static_cast<double>(alphas.size()) + 1);
  opts.rel_tol = 1e-12;
  auto half = integrate(integrand, breaks, opts);
  return {2.0 * half.value, 2.0 * half.abs_error_bound, half.evaluations};
}

QuadratureResult heat_kernel_time_integral(double x, double T, HeatMode mode,
                                           double h, bool absolute,
                                           const QuadratureOptions& opts) {
  if (std::isnan(T) || T <= 0.0) throw ParameterError("T must be > 0");
  if (mode != HeatMode::plain && !(h > 0.0 && std::isfinite(h))) {
    throw ParameterError("difference modes require h > 0");
  }
  auto g = [=](double s) {
    const double v = stencil(mode, s, x, h);
    return absolute ? std::fabs(v) : v;
  };
  // Where exp(-y^2 / 2 s^2) switches on for each stencil point y.
  std::vector<double> scales{std::fabs(x)};
  if (mode != HeatMode::plain) scales.push_back(std::fabs(x + h));
  if (mode == HeatMode::diff_hh) scales.push_back(std::fabs(x - h));
  std::vector<double> pts;
  for (double sc : scales) {
    for (double m : {0.25, 0.5, 1.0, 2.0}) pts.push_back(m * sc);
  }

  if (std::isfinite(T)) {
    const auto breaks = sorted_breaks(pts, 0.0, std::sqrt(T));
    return integrate(g, breaks, opts);
  }
  if (mode != HeatMode::diff_hh) {
    throw ParameterError("infinite time horizon needs the diff_hh mode");
  }
  const double s0 = 4.0 * (std::fabs(x) + h);
  const auto head = integrate(g, sorted_breaks(pts, 0.0, s0), opts);
  // s = s0 / v on v in (0, 1]; the integrand tends to 2 h^2 / (sqrt(2 pi) s0)
  // as v -> 0 in the signed case.
  auto tail_integrand = [&](double v) {
    if (v == 0.0) {
      return absolute ? std::fabs(2.0 * kInvSqrt2Pi * h * h / s0)
                      : 2.0 * kInvSqrt2Pi * h * h / s0;
    }
    return g(s0 / v) * s0 / (v * v);
  };
  const auto tail = integrate(tail_integrand, 0.0, 1.0, opts);
  return {head.value + tail.value, head.abs_error_bound + tail.abs_error_bound,
          head.evaluations + tail.evaluations};
}

QuadratureResult heat_kernel_laplace(double x, double alpha) {
  require_alpha(alpha);
  // e^{-alpha s^2} < 1e-18 beyond s_max.
  const double s_max = std::sqrt(42.0 / alpha);
  auto g = [=](double s) {
    return std::exp(-alpha * s * s) * weighted_density(s, x);
  };
  const auto breaks =
      sorted_breaks({0.5 * std::fabs(x), std::fabs(x), 2.0 * std::fabs(x)}, 0.0,
                    s_max);
  return integrate(g, breaks, {1e-15, 1e-13, 400'000});
}

QuadratureResult heat_diff_power_direct(double h, int q, TimeUpper upper) {
  if (!(h > 0.0 && h <= 1.0)) throw ParameterError("lag h must lie in (0, 1]");
  if (q < 2) throw ParameterError("q must be >= 2");
  const double T =
      upper == TimeUpper::infinity ? std::numeric_limits<double>::infinity()
                                   : h;
  std::size_t inner_evals = 0;
  double inner_err = 0.0;
  const QuadratureOptions inner_opts{1e-14 * h, 1e-11, 400'000};
  auto integrand = [&](double x) {
    const auto w =
        heat_kernel_time_integral(x, T, HeatMode::diff_hh, h, false, inner_opts);
    inner_evals += w.evaluations;
    const double wq = std::pow(w.value, q);
    // First-order propagation of the inner error into w^q.
    inner_err = std::max(inner_err, q * std::fabs(wq / w.value) *
                                        w.abs_error_bound);
    return wq;
  };
  std::vector<double> breaks;
  if (upper == TimeUpper::infinity) {
    breaks = {0.0, h, 2 * h, 4 * h, 8 * h, 16 * h, 32 * h};
  } else {
    const double r = std::sqrt(h);
    breaks = sorted_breaks({h, 2 * h, h + 2 * r, h + 5 * r}, 0.0, h + 10 * r);
  }
  QuadratureOptions opts;
  opts.abs_tol = 1e-9 * std::pow(h, q + 1);
  opts.rel_tol = 1e-9;
  auto half = integrate(integrand, breaks, opts);
  const double span = breaks.back();
  return {2.0 * half.value,
          2.0 * (half.abs_error_bound + inner_err * span),
          half.evaluations + inner_evals};
}

QuadratureResult heat_diff_power_fourier(double h, int q, TimeUpper upper) {
  if (!(h > 0.0 && h <= 1.0)) throw ParameterError("lag h must lie in (0, 1]");
  if (q != 2 && q != 3) {
    throw ParameterError("frequency-domain route implemented for q = 2, 3");
  }
  auto phi = [=](double p) { return sinc_half_sq(p) * time_cutoff(p, h, upper); };
  const double two_pi = 2.0 * std::numbers::pi;
  const double prefactor =
      std::pow(8.0, q) * std::pow(h, q + 1) / std::pow(two_pi, q - 1);
  const double r = std::sqrt(h);
  const std::vector<double> near_zero =
      upper == TimeUpper::h ? std::vector<double>{0.3 * r, r, 3 * r, 10 * r}
                            : std::vector<double>{};

  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-10;

  if (q == 2) {
    const int periods = 400;
    const double R = two_pi * periods;
    std::vector<double> breaks = near_zero;
    for (int k = 1; k < periods; ++k) breaks.push_back(two_pi * k);
    breaks = sorted_breaks(breaks, 0.0, R);
    auto half = integrate([&](double p) { return phi(p) * phi(p); }, breaks,
                          opts);
    // |phi|^2 <= p^{-4}: tail beyond R is at most 2 / (3 R^3).
    const double tail = 2.0 / (3.0 * R * R * R);
    return {prefactor * 2.0 * half.value,
            prefactor * (2.0 * half.abs_error_bound + tail), half.evaluations};
  }

  // q = 3: p1 = p2 + p3; the integrand is invariant under (p2, p3) -> -(p2,
  // p3), so integrate p2 >= 0 and double.
  const int periods = 48;
  const double R = two_pi * periods;
  std::size_t inner_evals = 0;
  double inner_err = 0.0;
  std::vector<double> lattice;
  for (int k = -periods + 1; k < periods; ++k) lattice.push_back(two_pi * k);
  auto outer = [&](double p2) {
    std::vector<double> pts = lattice;
    for (int k = -periods + 1; k < periods; ++k) {
      pts.push_back(-p2 + two_pi * k);
    }
    for (double z : near_zero) {
      pts.insert(pts.end(), {z, -z, -p2 + z, -p2 - z});
    }
    const auto breaks = sorted_breaks(pts, -R, R);
    QuadratureOptions inner_opts = opts;
    inner_opts.abs_tol = 1e-15;
    const auto in = integrate(
        [&](double p3) { return phi(p3) * phi(p2 + p3); }, breaks, inner_opts);
    inner_evals += in.evaluations;
    inner_err = std::max(inner_err, in.abs_error_bound);
    return phi(p2) * in.value;
  };
  std::vector<double> outer_pts = near_zero;
  for (int k = 1; k < periods; ++k) outer_pts.push_back(two_pi * k);
  auto half = integrate(outer, sorted_breaks(outer_pts, 0.0, R), opts);
  // Outside the square the integrand decays like p^{-4} along each axis
  // direction; pi / (2 R^3) bounds the leftover mass.
  const double tail = std::numbers::pi / (2.0 * R * R * R);
  return {prefactor * 2.0 * half.value,
          prefactor * (2.0 * half.abs_error_bound + 0.25 * R * inner_err +
                       tail),
          half.evaluations + inner_evals};
}

double HeatDiffPowerResult::relative_gap() const {
  return std::fabs(direct.value - fourier.value) / std::fabs(fourier.value);
}

HeatDiffPowerResult integral_heat_diff_power(double h, int q, TimeUpper upper) {
  return {heat_diff_power_direct(h, q, upper),
          heat_diff_power_fourier(h, q, upper)};
}

HeatSup sup_heat_bounds(double delta, double T, double h, double x) {
  if (!(delta > 0.0 && delta < T && std::isfinite(T))) {
    throw ParameterError("sup_heat_bounds requires 0 < delta < T < inf");
  }
  constexpr int kSamples = 4001;
  HeatSup out;
  const double log_ratio = std::log(T / delta);
  for (int i = 0; i < kSamples; ++i) {
    const double t = delta * std::exp(log_ratio * i / (kSamples - 1));
    auto p = [t](double y) { return heat_kernel(t, y); };
    out.u = std::max(out.u, p(x));
    out.v = std::max(out.v, std::fabs(diff_h(p, x, h)));
    out.w = std::max(out.w, std::fabs(diff_hh(p, x, h)));
  }
  return out;
}

}  // namespace loctime
