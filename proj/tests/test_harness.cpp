#include <doctest.h>

#include <cmath>
#include <vector>

#include "loctime/errors.hpp"
#include "loctime/harness.hpp"
#include "loctime/kac.hpp"

using namespace loctime;

namespace {

const Check* find(const ExperimentReport& r, const std::string& name, double h = -1) {
  for (const auto& c : r.checks) {
    if (c.name == name && (h < 0 || c.h == h)) return &c;
  }
  return nullptr;
}

ExperimentConfig small_clt3() {
  ExperimentConfig c;
  c.kind = ExperimentKind::clt3;
  c.n_paths = 300;
  c.dt = 1e-4;
  c.dx = 0.0025;
  c.h_list = {0.05};
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("oracle comparison") {
  TolerancePolicy p;
  MomentEstimate e;
  e.mean = 1.0;
  e.std_error = 0.5;
  auto v = compare_to_oracle(e, 1.0, 0.0, p);
  CHECK(v.z == 0.0);
  CHECK(v.pass);
  v = compare_to_oracle(e, 1.0 - 3.001 * 0.5, 0.0, p);
  CHECK(v.z == doctest::Approx(3.001));
  CHECK(!v.pass);
  v = compare_to_oracle(e, 1.0 - 3.0 * 0.5, 0.0, p);
  CHECK(v.pass);
  v = compare_to_oracle(e, 0.0, 0.5 * std::sqrt(3.0), p);
  CHECK(v.z == doctest::Approx(1.0));
  p.z_gate = 1.5;
  CHECK(!compare_to_oracle(e, 0.0, 0.0, p).pass);
  e.std_error = 0.0;
  CHECK(compare_to_oracle(e, 1.0, 0.0, p).pass);
  CHECK(!compare_to_oracle(e, 1.1, 0.0, p).pass);
}

TEST_CASE("parallel rows do not depend on the worker count") {
  auto row = [](std::size_t i, std::span<double> out) {
    out[0] = std::sin(static_cast<double>(i));
    out[1] = static_cast<double>(i * i);
  };
  std::vector<double> a, b, c;
  parallel_rows(1001, 2, 1, row, a);
  parallel_rows(1001, 2, 3, row, b);
  parallel_rows(1001, 2, 16, row, c);
  CHECK(a == b);
  CHECK(a == c);
  CHECK_THROWS_AS(parallel_rows(10, 1, 4,
                                [](std::size_t i, std::span<double>) {
                                  if (i == 7) throw ParameterError("boom");
                                },
                                a),
                  ParameterError);
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("experiments are reproducible and thread-count independent") {
  auto c = small_clt3();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  CHECK(reports_equivalent(a, b));
  c.threads = 4;
  CHECK(aggregates_equal(a, run_experiment(c)));
  c.base_seed += 1;
  CHECK(!aggregates_equal(a, run_experiment(c)));
}

TEST_CASE("CLT report carries statistic, second moment, oracle and z") {
  const auto r = run_experiment(small_clt3());
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].estimates.count("statistic") == 1);
  CHECK(r.rows[0].estimates.count("statistic_sq") == 1);
  const Check* v = find(r, "clt3_variance_vs_limit");
  REQUIRE(v != nullptr);
  CHECK(v->oracle == doctest::Approx(192.0 * r.rows[0].estimates.at("alpha_companion").mean));
  CHECK(std::isfinite(v->z));
  CHECK(find(r, "occupation_identity_every_path")->pass);
  CHECK(r.code_version.size() > 0);
}

TEST_CASE("narrow grids are widened, counted, and mark the run degraded") {
  auto c = small_clt3();
  c.half_width = 0.1;
  const auto r = run_experiment(c);
  CHECK(r.retries > 0);
  CHECK(r.degraded);
  CHECK(!r.passed());
  CHECK(find(r, "occupation_identity_every_path")->pass);
}

TEST_CASE("standard errors shrink like 1/sqrt(n)") {
  ExperimentConfig c;
  c.kind = ExperimentKind::kac_oracle;
  c.zeta = 1.0;
  c.dt = 1e-3;
  c.dx = 0.01;
  c.h_list = {0.5};
  c.threads = 1;
  c.kac_specs = parse_kac_specs("0", 1.0, 0.0, 0.5);
  c.n_paths = 2000;
  const double se1 = run_experiment(c).rows[0].estimates.at("kac_spec[0]").std_error;
  c.n_paths = 4000;
  c.base_seed = 99;
  const double se2 = run_experiment(c).rows[0].estimates.at("kac_spec[0]").std_error;
  CHECK(se1 / se2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.10));
}

TEST_CASE("Kac Monte Carlo agrees with the permutation sums") {
  ExperimentConfig c;
  c.kind = ExperimentKind::kac_oracle;
  c.zeta = 1.0;
  c.dt = 1e-4;
  c.dx = 0.005;
  c.h_list = {0.5};
  c.n_paths = 5000;
  c.threads = 1;
  c.kac_specs = parse_kac_specs("0 | 0,0 | 0,0.5 | 0:2", 1.0, 0.0, 0.5);
  const auto r = run_experiment(c);
  CHECK(r.passed());
  CHECK(find(r, "kac_n2_origin")->pass);
  CHECK(find(r, "exp_time_occupation_mean")->pass);
}

TEST_CASE("scaling identities for p = 3 and p = 2") {
  const auto r3 = scaling_check(1.0, 0.5, 3, 2000, 11);
  CHECK(find(r3, "scaling_power_p3")->pass);
  CHECK(find(r3, "scaling_cross_term")->pass);
  const auto r2 = scaling_check(1.0, 0.5, 2, 2000, 12);
  CHECK(find(r2, "scaling_power_p2")->pass);
}

TEST_CASE("exponential-time moments") {
  const auto m1 = exponential_time_moment_check(1, 0.05, 1.0, 1500, 1, 1e-4, 0.0025);
  CHECK(find(m1, "exp_time_first_moment_zero") != nullptr);
  CHECK(find(m1, "exp_time_second_moment_ratio") == nullptr);
  CHECK(find(m1, "exp_time_occupation_mean")->pass);
  const auto m2 = exponential_time_moment_check(2, 0.05, 1.0, 1500, 1, 1e-4, 0.0025);
  const Check* r = find(m2, "exp_time_second_moment_ratio");
  REQUIRE(r != nullptr);
  CHECK(std::isfinite(r->ratio));
  CHECK(r->ratio > 0.0);
  CHECK_THROWS_AS(exponential_time_moment_check(3, 0.05, 1.0, 200), ParameterError);
}

TEST_CASE("variance identity: degenerate horizon uses absolute smallness") {
  const auto r = variance_identity_check(1.0, 1e-4, {0.05}, 200, 3, 1e-5, 0.001);
  const Check* c = find(r, "variance_identity_degenerate_small");
  REQUIRE(c != nullptr);
  CHECK(c->pass);
  CHECK(find(r, "variance_identity_ratio") == nullptr);
}

TEST_CASE("variance identity reports ratio, trend and the diagnostic constant") {
  const auto r = variance_identity_check(1.0, 1.0, {0.1, 0.05}, 300, 3, 1e-4, 0.0025);
  CHECK(find(r, "variance_identity_ratio", 0.05) != nullptr);
  CHECK(find(r, "variance_identity_ratio", 0.05)->gating);
  CHECK(!find(r, "variance_identity_ratio", 0.1)->gating);
  CHECK(find(r, "variance_identity_ratio_trend") != nullptr);
  CHECK(find(r, "variance_identity_ratio_vs_64h4") != nullptr);
}

TEST_CASE("deterministic kinds produce gated checks without paths") {
  ExperimentConfig c;
  c.kind = ExperimentKind::lemma21_integrals;
  c.h_list = {0.1, 0.05, 0.02, 0.01};
  const auto r = run_experiment(c);
  CHECK(r.passed());
  CHECK(r.retries == 0);
  CHECK(find(r, "u_hh_at_zero_over_h")->pass);
  CHECK(find(r, "w_power_restricted_q2_over_h3_to_zero")->pass);
}

TEST_CASE("fourth-moment conjecture checks never gate") {
  ExperimentConfig c = small_clt3();
  c.kind = ExperimentKind::clt4_conjecture;
  c.h_list = {0.1, 0.05};
  const auto r = run_experiment(c);
  for (const auto& ch : r.checks) {
    if (ch.name.rfind("clt4", 0) == 0) CHECK(!ch.gating);
  }
  CHECK(find(r, "clt4_variance_ratio_trend") != nullptr);
}
