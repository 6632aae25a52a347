#pragma once

#include <map>
#include <string>
#include <vector>

#include "loctime/config.hpp"
#include "loctime/moments.hpp"

namespace loctime {

inline constexpr int kReportSchemaVersion = 1;

/// One compared pair: an estimate, its oracle, and the verdict.
struct Check {
  std::string name;
  std::string anchor;   // machine-readable reference to the claim checked
  double h = 0.0;       // 0 for checks not tied to a lag
  double estimate = 0.0;
  double estimate_se = 0.0;
  double oracle = 0.0;
  double oracle_se = 0.0;
  double z = 0.0;
  double ratio = 0.0;   // estimate / oracle where meaningful, else 0
  std::string gate;     // human-readable gate description
  bool pass = false;
  bool gating = true;   // false: reported only
};

struct LagRow {
  double h = 0.0;
  std::map<std::string, MomentEstimate> estimates;
};

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  ExperimentConfig config;
  std::vector<LagRow> rows;
  std::vector<Check> checks;
  std::size_t retries = 0;
  bool degraded = false;
  double wall_time = 0.0;
  std::string code_version;
  std::string tolerance_note;

  /// Every gating check passed and the run was not degraded.
  bool passed() const;
};

std::string report_to_json(const ExperimentReport& report, int indent = 2);
ExperimentReport report_from_json(const std::string& text);

/// Flat CSV, one line per check.
std::string report_to_csv(const ExperimentReport& report);
inline constexpr const char* kCsvHeader =
    "schema_version,kind,h,check,anchor,estimate,estimate_se,oracle,oracle_se,"
    "z,ratio,gating,pass";

/// Equal bodies, ignoring wall_time.
bool reports_equivalent(const ExperimentReport& a, const ExperimentReport& b);

/// Equal estimates, checks and retry counts (config and timing ignored).
bool aggregates_equal(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace loctime
