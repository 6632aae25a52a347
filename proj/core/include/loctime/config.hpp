#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loctime/kac.hpp"
#include "loctime/paths.hpp"

namespace loctime {

enum class ExperimentKind {
  clt2,
  clt3,
  clt4_conjecture,
  scaling,
  kac_oracle,
  exp_time_moments,
  variance_identity,
  lemma21_integrals,
  lemma24_integrals,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);
bool is_monte_carlo(ExperimentKind kind);

/// Gate parameters. Defaults are the finite-h engineering tolerances used by
/// the acceptance suite.
struct TolerancePolicy {
  double z_gate = 3.0;            // |z| threshold for statistical comparisons
  double clt_relative = 0.15;     // CLT variance: relative band (OR z_gate)
  double ratio_lo = 0.8;          // variance identity ratio band
  double ratio_hi = 1.25;
  double moment_ratio_lo = 0.8;   // exponential-time second moment band
  double moment_ratio_hi = 1.2;
  double coeff_relative = 0.10;   // potential-density coefficients
  double heat_coeff_relative = 0.15;
  double fourier_relative = 1e-3;
  double laplace_abs = 1e-6;
  double occupation_relative = 1e-9;
  double exact_relative = 1e-12;
  double degraded_retry_fraction = 0.01;
};

/// One verification experiment. Fields not used by a kind keep defaults.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::clt3;
  double t = 1.0;
  double s = 1.0;                 // second path horizon (variance identity)
  std::vector<double> h_list{0.02};
  double dt = 1e-5;
  double dx = 0.001;
  double half_width = 0.0;        // 0: 6 sqrt(t_max)
  std::size_t n_paths = 10'000;
  std::uint64_t base_seed = 20240601;
  std::optional<double> zeta;     // killing rate for exponential-time kinds
  int p = 3;                      // scaling power
  double start = 0.0;             // killed-path start (kac_oracle)
  std::vector<PermutationSumSpec> kac_specs;
  double alpha = 0.5;             // potential-density rate (lemma21)
  std::vector<int> q_list{2, 3};
  unsigned threads = 0;           // 0: hardware concurrency
  bool allow_coarse_dt = false;
  bool fourth_split_centering = false;
  TolerancePolicy tolerance;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Spatial grid for a path of horizon t_max (centered lattice).
  GridSpec grid_for(double t_max) const;
  double t_max() const;
};

/// Flat INI-style text: [section] headers and key = value lines, '#' or ';'
/// comments. Keys may be given bare or as section.key in overrides.
using IniTable = std::map<std::string, std::string>;  // "section.key" -> value

IniTable parse_ini(std::istream& in);
IniTable parse_ini_file(const std::string& path);

/// Applies "key=value" overrides; bare keys resolve to the unique section
/// that defines them, or to the canonical section for that key.
void apply_overrides(IniTable& table, const std::vector<std::string>& overrides);

ExperimentConfig config_from_table(const IniTable& table);
IniTable config_to_table(const ExperimentConfig& config);
std::string render_ini(const IniTable& table);

/// "x1,x2[:f1,f2]" entries separated by '|'.
std::vector<PermutationSumSpec> parse_kac_specs(const std::string& text,
                                                double alpha, double start,
                                                double h);
std::string format_kac_specs(const std::vector<PermutationSumSpec>& specs);

}  // namespace loctime
