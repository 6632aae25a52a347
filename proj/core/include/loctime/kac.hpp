#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "loctime/paths.hpp"

namespace loctime {

inline constexpr std::size_t kKacMaxPoints = 9;

/// Inputs of one evaluation of Kac's moment formula at an exponential time.
///
/// diff_flags[j] selects the operator applied to L^{x_j}: 0 leaves it alone,
/// 1 applies Delta^h, 2 applies Delta^h Delta^{-h}. An empty flag vector
/// means all zeros.
struct PermutationSumSpec {
  std::vector<double> points;
  double alpha = 0.5;
  double start = 0.0;
  std::vector<int> diff_flags;
  double h = 0.0;

  void validate() const;
  int flag(std::size_t j) const { return diff_flags.empty() ? 0 : diff_flags[j]; }
};

struct PermutationSumResult {
  double value = 0.0;
  std::uint64_t n_permutations = 0;  // n! per evaluated configuration
};

/// sum over permutations pi of prod_j u^alpha(x_{pi(j)} - x_{pi(j-1)}) with
/// x_{pi(0)} = start. Requires all diff flags zero. Work is split by the first
/// element of the permutation; partial sums are reduced in prefix order, so
/// the result does not depend on the thread count.
PermutationSumResult kac_moment(const PermutationSumSpec& spec,
                                unsigned threads = 1);

/// A finite-difference configuration: shifted points with an integer weight.
struct ShiftedConfiguration {
  std::vector<double> points;  // sorted
  long long weight = 0;
};

/// Inclusion-exclusion expansion of the difference operators, merged over
/// identical (sorted) point sets.
std::vector<ShiftedConfiguration> expand_differences(
    const PermutationSumSpec& spec);

/// E^{start}[prod_j (op_j L)^{x_j}_{lambda_alpha}]: kac_moment on every
/// configuration of expand_differences, weighted and summed.
PermutationSumResult kac_increment_moment(const PermutationSumSpec& spec,
                                          unsigned threads = 1);

/// sum_k coeff_k e^{-exponent_k}. At alpha = 1/2 every Kac summand is
/// e^{-(sum of jump lengths)}, so collecting exponents gives an exact
/// representation whenever the jump sums are exact in binary floating point
/// (e.g. dyadic points).
struct ExpPolynomial {
  std::map<double, long long> terms;  // exponent -> coefficient
  double evaluate() const;
  long long total_coefficient() const;
};

/// Exact-rational evaluation of kac_increment_moment at alpha = 1/2.
ExpPolynomial kac_moment_exact(const PermutationSumSpec& spec);

/// The Monte Carlo observable whose mean kac_increment_moment predicts:
/// prod_j (op_j L)(x_j) read off a local time field.
double kac_observable(const LocalTimeField& field,
                      const PermutationSumSpec& spec);

}  // namespace loctime
