#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "loctime/harness.hpp"
#include "loctime/report.hpp"

using namespace loctime;

namespace {

ExperimentReport sample_report() {
  ExperimentConfig c;
  c.kind = ExperimentKind::clt3;
  c.n_paths = 200;
  c.dt = 1e-4;
  c.dx = 0.0025;
  c.h_list = {0.05, 0.1};
  c.threads = 1;
  return run_experiment(c);
}

}  // namespace

TEST_CASE("JSON round trip preserves the report body") {
  const auto r = sample_report();
  const auto text = report_to_json(r);
  const auto back = report_from_json(text);
  CHECK(reports_equivalent(r, back));
  CHECK(report_to_json(back) == text);
  CHECK(back.schema_version == kReportSchemaVersion);
  CHECK(back.code_version == r.code_version);
  CHECK(!back.tolerance_note.empty());
  CHECK(text.find("\"anchor\"") != std::string::npos);
}

TEST_CASE("non-finite values travel as null") {
  auto r = sample_report();
  r.checks.front().z = std::numeric_limits<double>::infinity();
  const auto text = report_to_json(r);
  CHECK(text.find("null") != std::string::npos);
  const auto back = report_from_json(text);
  CHECK(std::isnan(back.checks.front().z));
}

TEST_CASE("CSV has a header and one line per check") {
  const auto r = sample_report();
  const auto csv = report_to_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvHeader);
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  CHECK(n == r.checks.size());
}

TEST_CASE("equivalence ignores wall time only") {
  const auto a = sample_report();
  auto b = a;
  b.wall_time += 5.0;
  CHECK(reports_equivalent(a, b));
  b.checks.front().estimate += 1e-12;
  CHECK(!reports_equivalent(a, b));
  CHECK(!aggregates_equal(a, b));
}

TEST_CASE("every check names an anchor") {
  for (const auto& c : sample_report().checks) CHECK(!c.anchor.empty());
}
