#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "loctime/config.hpp"
#include "loctime/moments.hpp"
#include "loctime/report.hpp"

namespace loctime {

struct Verdict {
  double z = 0.0;
  bool pass = false;
};

/// z = (est.mean - oracle) / sqrt(est.se^2 + oracle_se^2); pass iff
/// |z| <= policy.z_gate. A zero combined error passes only on exact equality.
Verdict compare_to_oracle(const MomentEstimate& est, double oracle,
                          double oracle_se, const TolerancePolicy& policy);

/// Runs one experiment. Deterministic in config (base_seed included);
/// the thread count never changes the aggregates.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Two independent paths per sample: checks the second moment of
/// int {(Delta^h L_t)^2 - 4h L_t} Delta^h L~_s dx against
/// 32 h^4 E int (L_t)^2 L~_s dx.
ExperimentReport variance_identity_check(double t, double s,
                                         std::vector<double> h_list,
                                         std::size_t n_pairs,
                                         std::uint64_t base_seed,
                                         double dt = 1e-5, double dx = 1e-3);

/// Means of int (Delta^h L_t)^p and int (Delta^h L_t) L_t against
/// h^{p+1} and h^3 times the lag-1 versions at horizon t / h^2.
ExperimentReport scaling_check(double t, double h, int p, std::size_t n_paths,
                               std::uint64_t base_seed, double dt = 1e-4,
                               double dx = 0.01);

/// m-th moment (m in {1, 2}) of the exponential-time third-moment statistic.
ExperimentReport exponential_time_moment_check(int m, double h, double zeta,
                                               std::size_t n_paths,
                                               std::uint64_t base_seed = 1,
                                               double dt = 1e-5,
                                               double dx = 1e-3);

/// Laplace transform of the heat kernel in t, by quadrature:
/// max over x in [-5, 5] (101 points) of |int e^{-alpha t} p_t(x) dt - u^alpha(x)|.
double laplace_identity_max_error(double alpha);

/// Worker count actually used for a requested value (0 = auto).
unsigned resolve_threads(unsigned requested);

/// Evaluates row(i, out) for i in [0, n) into an n x width matrix. Rows are
/// assigned to workers in contiguous blocks; the matrix is independent of
/// the worker count.
void parallel_rows(std::size_t n, std::size_t width, unsigned threads,
                   const std::function<void(std::size_t, std::span<double>)>& row,
                   std::vector<double>& matrix);

}  // namespace loctime
