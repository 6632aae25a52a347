#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "loctime/errors.hpp"
#include "loctime/harness.hpp"
#include "loctime/kernels.hpp"
#include "loctime/quadrature.hpp"

using namespace loctime;

TEST_CASE("potential density values and evenness") {
  CHECK(u_alpha(0.0, 0.5) == 1.0);
  for (double x : {0.1, 0.7, 3.0}) {
    for (double a : {0.5, 1.0, 2.0}) CHECK(u_alpha(x, a) == u_alpha(-x, a));
  }
  CHECK(u_alpha(1.0, 2.0) == doctest::Approx(std::exp(-2.0) / 2.0));
  CHECK_THROWS_AS(u_alpha(0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(u_alpha(0.0, -1.0), ParameterError);
}

TEST_CASE("potential density integrates to 1/alpha") {
  for (double a : {0.5, 1.0, 2.0}) {
    const std::vector<double> breaks{-60.0, 0.0, 60.0};
    const auto r = integrate([a](double x) { return u_alpha(x, a); }, breaks);
    CHECK(std::fabs(r.value - 1.0 / a) < 1e-8);
  }
}

TEST_CASE("heat kernel values, symmetry and domain") {
  CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(heat_kernel(0.3, 0.8) == heat_kernel(0.3, -0.8));
  CHECK_THROWS_AS(heat_kernel(0.0, 1.0), ParameterError);
}

TEST_CASE("Laplace transform of the heat kernel is the potential density") {
  for (double a : {0.5, 1.0, 2.0}) CHECK(laplace_identity_max_error(a) <= 1e-6);
  CHECK(heat_kernel_laplace(0.0, 0.5).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("difference operators") {
  const auto u = [](double x) { return u_alpha(x, 0.5); };
  const double h = 0.1;
  CHECK(diff_hh(u, 0.0, h) == doctest::Approx(2.0 * (u_alpha(0, 0.5) - u_alpha(h, 0.5))));
  CHECK(diff_hh([](double x) { return 3.0 * x - 2.0; }, 0.7, 0.2) == doctest::Approx(0.0));
  CHECK(diff_h([](double) { return 5.0; }, 0.3, 0.1) == 0.0);
  CHECK(diff_h([](double x) { return x * x; }, 1.0, 0.5) == doctest::Approx(1.25));
}

TEST_CASE("second difference of the potential at the origin") {
  CHECK(u_hh_at_zero(0.5, 1e-4) / 1e-4 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(u_hh_at_zero(0.5, 1.0) == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-15));
  for (double a : {0.5, 1.0, 3.0}) {
    for (double h : {1e-3, 0.1, 0.9}) {
      const auto u = [a](double x) { return u_alpha(x, a); };
      CHECK(u_hh_at_zero(a, h) == doctest::Approx(diff_hh(u, 0.0, h)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(u_hh_at_zero(0.5, 1.5), ParameterError);
  CHECK_THROWS_AS(u_hh_at_zero(0.5, 0.0), ParameterError);
}

TEST_CASE("powers of the second difference: coefficients 2^{q+1}/(q+1)") {
  CHECK(second_difference_coefficient(2) == doctest::Approx(8.0 / 3.0));
  CHECK(second_difference_coefficient(3) == doctest::Approx(4.0));
  for (int q : {2, 3}) {
    const double coef = second_difference_coefficient(q);
    double prev_err = 1e9;
    for (double h : {0.1, 0.05, 0.02, 0.01}) {
      const auto r = integral_w_power(0.5, h, q);
      const double scale = std::pow(h, q + 1);
      CHECK(r.abs_error_bound <= 1e-3 * scale);
      const double err = std::fabs(r.value / scale / coef - 1.0);
      CHECK(err < prev_err);
      prev_err = err;
    }
    CHECK(prev_err <= 0.10);
  }
}

TEST_CASE("restricted q = 2 integral is of higher order") {
  double prev = 1e9;
  for (double h : {0.1, 0.05, 0.02, 0.01}) {
    const double r = integral_w_power(0.5, h, 2, true).value / std::pow(h, 3);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("q = 1 integral is O(h^2)") {
  for (double h : {0.1, 0.01}) {
    CHECK(std::fabs(integral_w_power(0.5, h, 1).value) <= 10.0 * h * h);
  }
}

TEST_CASE("mixed-rate products share the coefficient") {
  const std::vector<double> same{0.5, 0.5, 0.5};
  CHECK(integral_w_power_multi(same, 0.05).value ==
        doctest::Approx(integral_w_power(0.5, 0.05, 3).value).epsilon(1e-8));
  const std::vector<double> three{0.5, 1.0, 2.0};
  CHECK(integral_w_power_multi(three, 0.01).value / std::pow(0.01, 4) ==
        doctest::Approx(4.0).epsilon(0.10));
  const std::vector<double> two{1.0, 2.0};
  CHECK(integral_w_power_multi(two, 0.01).value / std::pow(0.01, 3) ==
        doctest::Approx(8.0 / 3.0).epsilon(0.10));
}

TEST_CASE("time integrals of the heat kernel") {
  CHECK(heat_kernel_time_integral(0.0, 1.0, HeatMode::plain).value ==
        doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
  // Infinite horizon second difference is a tent of height 2h.
  const double h = 0.05;
  CHECK(heat_kernel_time_integral(0.0, INFINITY, HeatMode::diff_hh, h).value ==
        doctest::Approx(2.0 * h).epsilon(1e-8));
  CHECK(heat_kernel_time_integral(0.5 * h, INFINITY, HeatMode::diff_hh, h).value ==
        doctest::Approx(h).epsilon(1e-8));
  CHECK(std::fabs(heat_kernel_time_integral(3.0 * h, INFINITY, HeatMode::diff_hh, h).value) < 1e-10);
  CHECK_THROWS_AS(heat_kernel_time_integral(0.0, INFINITY, HeatMode::plain), ParameterError);
  CHECK_THROWS_AS(heat_kernel_time_integral(0.0, 1.0, HeatMode::diff_h, 0.0), ParameterError);
}

TEST_CASE("heat second-difference powers: direct and frequency routes agree") {
  for (int q : {2, 3}) {
    for (auto upper : {TimeUpper::infinity, TimeUpper::h}) {
      const auto r = integral_heat_diff_power(0.01, q, upper);
      CHECK(r.relative_gap() <= 1e-3);
    }
  }
  const auto inf2 = integral_heat_diff_power(0.01, 2, TimeUpper::infinity);
  CHECK(inf2.direct.value / 1e-6 == doctest::Approx(8.0 / 3.0).epsilon(0.15));
  const auto h2 = integral_heat_diff_power(0.01, 2, TimeUpper::h);
  CHECK(h2.direct.value / 1e-6 == doctest::Approx(8.0 / 3.0).epsilon(0.15));
  const auto inf3 = integral_heat_diff_power(0.01, 3, TimeUpper::infinity);
  CHECK(inf3.direct.value / 1e-8 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("truncated-time q = 3 coefficient converges at rate sqrt(h)") {
  std::vector<double> errs;
  for (double h : {0.04, 0.01, 0.0025}) {
    const auto r = integral_heat_diff_power(h, 3, TimeUpper::h);
    errs.push_back(std::fabs(r.direct.value / std::pow(h, 4) / 4.0 - 1.0));
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  // Quartering h halves the error.
  CHECK(errs[0] / errs[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(errs[1] / errs[2] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(errs[2] <= 0.15);
}

TEST_CASE("sup bounds over a time window") {
  const auto s = sup_heat_bounds(0.1, 1.0, 0.05, 0.0);
  CHECK(s.u == doctest::Approx(heat_kernel(0.1, 0.0)).epsilon(1e-12));
  CHECK(s.v >= 0.0);
  CHECK(s.w >= 0.0);
  CHECK_THROWS_AS(sup_heat_bounds(0.0, 1.0, 0.05, 0.0), ParameterError);
}
