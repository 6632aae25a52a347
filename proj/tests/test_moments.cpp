#include <doctest.h>

#include <cmath>
#include <vector>

#include "loctime/moments.hpp"

using namespace loctime;

TEST_CASE("moment estimate matches hand computation") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const auto e = MomentEstimate::from_samples(xs);
  CHECK(e.n == 4);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.raw_second_moment == doctest::Approx(7.5));
}

TEST_CASE("constant samples have zero standard error") {
  const std::vector<double> xs(10, 3.25);
  const auto e = MomentEstimate::from_samples(xs);
  CHECK(e.mean == 3.25);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("compensated sum recovers cancelled small terms") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-9));
}
