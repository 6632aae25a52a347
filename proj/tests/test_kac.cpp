#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "loctime/errors.hpp"
#include "loctime/kac.hpp"
#include "loctime/kernels.hpp"

using namespace loctime;

TEST_CASE("single point: u^alpha(x - start)") {
  for (double x : {0.0, 0.5, -1.25}) {
    const PermutationSumSpec s{{x}, 0.7, 0.0, {}, 0.0};
    const auto r = kac_moment(s);
    CHECK(r.value == doctest::Approx(u_alpha(x, 0.7)).epsilon(1e-12));
    CHECK(r.n_permutations == 1);
  }
  const PermutationSumSpec s{{0.0}, 0.5, 0.0, {}, 0.0};
  CHECK(kac_moment(s).value == 1.0);
  const PermutationSumSpec shifted{{1.0}, 0.5, 0.4, {}, 0.0};
  CHECK(kac_moment(shifted).value == doctest::Approx(std::exp(-0.6)).epsilon(1e-14));
}

TEST_CASE("two points at the origin: 2 u(0)^2") {
  for (double a : {0.5, 1.0, 3.0}) {
    const PermutationSumSpec s{{0.0, 0.0}, a, 0.0, {}, 0.0};
    CHECK(kac_moment(s).value == doctest::Approx(2.0 * std::pow(u_alpha(0, a), 2)).epsilon(1e-12));
  }
}

TEST_CASE("two distinct points: hand enumeration") {
  const double a = 1.0, x = 0.3, y = -0.4;
  const PermutationSumSpec s{{x, y}, a, 0.0, {}, 0.0};
  const double want = u_alpha(x, a) * u_alpha(y - x, a) + u_alpha(y, a) * u_alpha(x - y, a);
  CHECK(kac_moment(s).value == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("permutation symmetry is exact") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    PermutationSumSpec s{{}, 0.8, 0.1, {}, 0.0};
    for (int i = 0; i < 6; ++i) s.points.push_back(pos(rng));
    const double base = kac_moment(s).value;
    CHECK(base > 0.0);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(s.points.begin(), s.points.end(), rng);
      CHECK(kac_moment(s).value == base);
    }
  }
  // With difference flags, shuffling (point, flag) pairs together.
  PermutationSumSpec d{{0.0, 0.3, -0.2}, 1.0, 0.0, {1, 2, 0}, 0.1};
  const double base = kac_increment_moment(d).value;
  std::vector<std::size_t> order{0, 1, 2};
  while (std::next_permutation(order.begin(), order.end())) {
    PermutationSumSpec p = d;
    for (std::size_t i = 0; i < 3; ++i) {
      p.points[i] = d.points[order[i]];
      p.diff_flags[i] = d.diff_flags[order[i]];
    }
    CHECK(kac_increment_moment(p).value == base);
  }
}

TEST_CASE("n! permutations and the size limit") {
  PermutationSumSpec s{{0, 0.1, 0.2, 0.3, 0.4}, 1.0, 0.0, {}, 0.0};
  CHECK(kac_moment(s).n_permutations == 120);
  s.points.assign(10, 0.0);
  CHECK_THROWS_AS(kac_moment(s), SizeError);
  PermutationSumSpec f{{0.0}, 1.0, 0.0, {1}, 0.1};
  CHECK_THROWS_AS(kac_moment(f), ParameterError);
  PermutationSumSpec noh{{0.0}, 1.0, 0.0, {2}, 0.0};
  CHECK_THROWS_AS(kac_increment_moment(noh), ParameterError);
  PermutationSumSpec badflag{{0.0}, 1.0, 0.0, {3}, 0.1};
  CHECK_THROWS_AS(kac_increment_moment(badflag), ParameterError);
  PermutationSumSpec badalpha{{0.0}, 0.0, 0.0, {}, 0.0};
  CHECK_THROWS_AS(kac_moment(badalpha), ParameterError);
}

TEST_CASE("thread count does not change the permutation sum") {
  PermutationSumSpec s{{-0.3, -0.1, 0.0, 0.2, 0.25, 0.4, 0.7, 1.0}, 0.9, 0.05, {}, 0.0};
  CHECK(kac_moment(s, 1).value == kac_moment(s, 4).value);
}

TEST_CASE("second difference at one point: 2(u(0) - u(h))") {
  const double a = 0.5, h = 0.1;
  const PermutationSumSpec s{{0.0}, a, 0.0, {2}, h};
  CHECK(kac_increment_moment(s).value ==
        doctest::Approx(2.0 * (u_alpha(0, a) - u_alpha(h, a))).epsilon(1e-12));
  // Ratio to h tends to 2.
  double prev = 1e9;
  for (double hh : {0.1, 0.01, 0.001}) {
    const PermutationSumSpec t{{0.0}, a, 0.0, {2}, hh};
    const double err = std::fabs(kac_increment_moment(t).value / hh - 2.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("two first differences at the origin: hand expansion") {
  // E[(L^h - L^0)^2] = m(h,h) - 2 m(0,h) + m(0,0), m = two-point Kac moment.
  const double a = 1.0, h = 0.2;
  auto m = [&](double x, double y) {
    return u_alpha(x, a) * u_alpha(y - x, a) + u_alpha(y, a) * u_alpha(x - y, a);
  };
  const double want = m(h, h) - 2.0 * m(0.0, h) + m(0.0, 0.0);
  const PermutationSumSpec s{{0.0, 0.0}, a, 0.0, {1, 1}, h};
  CHECK(kac_increment_moment(s).value == doctest::Approx(want).epsilon(1e-12));
  const auto configs = expand_differences(s);
  CHECK(configs.size() == 3);  // {0,0}, {0,h}, {h,h} after merging
}

TEST_CASE("exact mode at alpha = 1/2 agrees with floating point") {
  const PermutationSumSpec s{{0.0, 0.25, -0.5, 0.75}, 0.5, 0.125, {1, 0, 2, 0}, 0.25};
  const auto exact = kac_moment_exact(s);
  CHECK(exact.evaluate() == doctest::Approx(kac_increment_moment(s).value).epsilon(1e-12));
  // Undifferenced: coefficients count all n! orderings.
  const PermutationSumSpec plain{{0.0, 0.5, 1.0}, 0.5, 0.0, {}, 0.0};
  CHECK(kac_moment_exact(plain).total_coefficient() == 6);
  CHECK(kac_moment_exact(plain).evaluate() == doctest::Approx(kac_moment(plain).value).epsilon(1e-13));
  const PermutationSumSpec other{{0.0}, 1.0, 0.0, {}, 0.0};
  CHECK_THROWS_AS(kac_moment_exact(other), ParameterError);
}
