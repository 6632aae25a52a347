#include <doctest.h>

#include <cmath>
#include <sstream>

#include "loctime/calibration.hpp"
#include "loctime/errors.hpp"

using namespace loctime;

namespace {
const Calibration& frozen() {
  static const Calibration c = load_calibration(LOCTIME_SOURCE_DIR "/calibration/constants.cfg");
  return c;
}
}  // namespace

TEST_CASE("the repository calibration file is complete and positive") {
  const auto& c = frozen();
  CHECK(c.safety_factor == 1.5);
  CHECK(c.point.h == 0.1);
  for (BoundKind k : all_bound_kinds()) {
    const double v = c.constant(k);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
}

TEST_CASE("frozen constants bound every smaller lag") {
  const auto& c = frozen();
  for (BoundKind k : all_bound_kinds()) {
    for (double h : {0.05, 0.02, 0.01, 0.005}) {
      INFO(calibration_key(k), " at h = ", h);
      CHECK(c.holds(k, h));
    }
  }
}

TEST_CASE("refitting reproduces the frozen file") {
  const auto fresh = fit_calibration();
  for (const auto& [key, value] : frozen().constants) {
    CHECK(fresh.constants.at(key) == doctest::Approx(value).epsilon(1e-9));
  }
}

TEST_CASE("calibration text round trips and carries anchors") {
  const auto text = render_calibration(frozen());
  CHECK(text.find("# anchor: potential.first_difference_bound") != std::string::npos);
  std::istringstream in(text);
  const auto back = parse_calibration(in);
  CHECK(back.constants == frozen().constants);
  CHECK(back.point.T == frozen().point.T);
  std::istringstream bad("heat.v_T = abc\n");
  CHECK_THROWS_AS(parse_calibration(bad), ConfigError);
  Calibration empty;
  CHECK_THROWS_AS(empty.constant(BoundKind::heat_v), ConfigError);
}
