#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "loctime/errors.hpp"
#include "loctime/quadrature.hpp"

using namespace loctime;

TEST_CASE("polynomials up to degree 13 are integrated exactly on one panel") {
  const auto r = integrate([](double x) { return std::pow(x, 13) + 3 * x * x; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0 / 14.0 + 1.0).epsilon(1e-14));
  CHECK(r.evaluations == 15);
}

TEST_CASE("smooth and oscillatory integrands") {
  const auto e = integrate([](double x) { return std::exp(-x); }, 0.0, 40.0);
  CHECK(e.value == doctest::Approx(1.0 - std::exp(-40.0)).epsilon(1e-12));
  CHECK(e.abs_error_bound >= 0.0);
  const auto s = integrate([](double x) { return std::sin(x); }, 0.0, 20.0 * std::numbers::pi);
  CHECK(std::fabs(s.value) < 1e-10);
}

TEST_CASE("endpoint singularity converges adaptively") {
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                           {1e-10, 1e-10, 200000});
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("breakpoints split kinks") {
  const std::vector<double> breaks{-1.0, 0.0, 1.0};
  const auto r = integrate([](double x) { return std::fabs(x); }, breaks);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, bad), ParameterError);
}
