#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loctime/config.hpp"
#include "loctime/report.hpp"

namespace loctime {

/// A named experiment of the acceptance suite.
struct NamedConfig {
  std::string name;
  ExperimentConfig config;
};

/// Experiments backing the acceptance criteria. Quick mode changes only
/// config values (sizes, meshes, gates), never the code path.
std::vector<NamedConfig> acceptance_configs(bool quick);

struct CriterionOutcome {
  int id = 0;
  std::string title;
  std::string anchor;
  bool pass = false;
  bool gating = true;
  std::string detail;
};

struct AcceptanceOptions {
  bool quick = false;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;  // replaces every base_seed
  std::set<int> only;                 // empty: all criteria
  std::function<void(const std::string&)> progress;
};

struct AcceptanceRun {
  std::vector<CriterionOutcome> criteria;
  std::vector<NamedConfig> configs;
  std::vector<ExperimentReport> reports;  // parallel to configs

  bool passed() const;
};

AcceptanceRun run_acceptance(const AcceptanceOptions& options);

/// "criterion  7  FAIL  <title>  [anchor]  detail"
std::string format_outcome(const CriterionOutcome& outcome);

}  // namespace loctime
