#include "loctime/kac.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <string>

#include "loctime/errors.hpp"
#include "loctime/kernels.hpp"
#include "loctime/moments.hpp"

namespace loctime {
namespace {

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

// Sum over permutations of points whose first element is `first`.
double prefix_sum(const std::vector<double>& u_from_start,
                  const std::vector<double>& u_between, std::size_t n,
                  std::size_t first) {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != first) rest.push_back(i);
  }
  CompensatedSum sum;
  do {
    double prod = u_from_start[first];
    std::size_t prev = first;
    for (std::size_t idx : rest) {
      prod *= u_between[prev * n + idx];
      prev = idx;
    }
    sum.add(prod);
  } while (std::next_permutation(rest.begin(), rest.end()));
  return sum.value();
}

// Points are sorted first so any input ordering sums in the same order.
double permutation_sum(std::vector<double> points, double alpha, double start,
                       unsigned threads) {
  std::sort(points.begin(), points.end());
  const std::size_t n = points.size();
  if (n == 0) return 1.0;
  std::vector<double> from_start(n);
  std::vector<double> between(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    from_start[i] = u_alpha(points[i] - start, alpha);
    for (std::size_t j = 0; j < n; ++j) {
      between[i * n + j] = u_alpha(points[j] - points[i], alpha);
    }
  }
  std::vector<double> partial(n);
  if (threads > 1 && n >= 7) {
    std::vector<std::future<double>> jobs;
    for (std::size_t first = 0; first < n; ++first) {
      jobs.push_back(std::async(std::launch::async, prefix_sum,
                                std::cref(from_start), std::cref(between), n,
                                first));
    }
    for (std::size_t first = 0; first < n; ++first) {
      partial[first] = jobs[first].get();
    }
  } else {
    for (std::size_t first = 0; first < n; ++first) {
      partial[first] = prefix_sum(from_start, between, n, first);
    }
  }
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

}  // namespace

void PermutationSumSpec::validate() const {
  if (points.size() > kKacMaxPoints) {
    throw SizeError("Kac moment with " + std::to_string(points.size()) +
                    " points exceeds the limit of " +
                    std::to_string(kKacMaxPoints));
  }
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw ParameterError("Kac moment requires alpha > 0");
  }
  if (!std::isfinite(start)) throw ParameterError("start must be finite");
  for (double x : points) {
    if (!std::isfinite(x)) throw ParameterError("points must be finite");
  }
  if (!diff_flags.empty() && diff_flags.size() != points.size()) {
    throw ParameterError("diff_flags must match points in length");
  }
  bool any_diff = false;
  for (int f : diff_flags) {
    if (f < 0 || f > 2) throw ParameterError("diff flag must be 0, 1 or 2");
    any_diff = any_diff || f != 0;
  }
  if (any_diff && !(h > 0.0 && std::isfinite(h))) {
    throw ParameterError("difference flags require h > 0");
  }
}

PermutationSumResult kac_moment(const PermutationSumSpec& spec,
                                unsigned threads) {
  spec.validate();
  for (std::size_t j = 0; j < spec.points.size(); ++j) {
    if (spec.flag(j) != 0) {
      throw ParameterError("kac_moment takes undifferenced points only");
    }
  }
  return {permutation_sum(spec.points, spec.alpha, spec.start, threads),
          factorial(spec.points.size())};
}

std::vector<ShiftedConfiguration> expand_differences(
    const PermutationSumSpec& spec) {
  spec.validate();
  struct Term {
    double shift;
    long long weight;
  };
  const double h = spec.h;
  std::map<std::vector<double>, long long> merged;
  std::vector<double> current(spec.points.size());
  // Odometer over the per-point stencil choices.
  auto stencil = [&](std::size_t j) -> std::vector<Term> {
    switch (spec.flag(j)) {
      case 1:
        return {{h, 1}, {0.0, -1}};
      case 2:
        return {{0.0, 2}, {h, -1}, {-h, -1}};
      default:
        return {{0.0, 1}};
    }
  };
  const std::size_t n = spec.points.size();
  std::vector<std::vector<Term>> choices(n);
  for (std::size_t j = 0; j < n; ++j) choices[j] = stencil(j);
  std::vector<std::size_t> digit(n, 0);
  while (true) {
    long long w = 1;
    for (std::size_t j = 0; j < n; ++j) {
      current[j] = spec.points[j] + choices[j][digit[j]].shift;
      w *= choices[j][digit[j]].weight;
    }
    std::vector<double> key = current;
    std::sort(key.begin(), key.end());
    merged[key] += w;
    std::size_t j = 0;
    while (j < n && ++digit[j] == choices[j].size()) {
      digit[j] = 0;
      ++j;
    }
    if (j == n) break;
  }
  std::vector<ShiftedConfiguration> out;
  for (auto& [pts, w] : merged) {
    if (w != 0) out.push_back({pts, w});
  }
  return out;
}

PermutationSumResult kac_increment_moment(const PermutationSumSpec& spec,
                                          unsigned threads) {
  const auto configs = expand_differences(spec);
  CompensatedSum total;
  for (const auto& c : configs) {
    total.add(static_cast<double>(c.weight) *
              permutation_sum(c.points, spec.alpha, spec.start, threads));
  }
  return {total.value(), factorial(spec.points.size())};
}

double ExpPolynomial::evaluate() const {
  CompensatedSum s;
  for (const auto& [e, c] : terms) s.add(static_cast<double>(c) * std::exp(-e));
  return s.value();
}

long long ExpPolynomial::total_coefficient() const {
  long long s = 0;
  for (const auto& [e, c] : terms) s += c;
  return s;
}

ExpPolynomial kac_moment_exact(const PermutationSumSpec& spec) {
  if (spec.alpha != 0.5) {
    throw ParameterError("exact Kac evaluation requires alpha = 1/2");
  }
  ExpPolynomial out;
  for (const auto& config : expand_differences(spec)) {
    const auto& pts = config.points;
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    do {
      double exponent = 0.0;
      double prev = spec.start;
      for (std::size_t idx : order) {
        exponent += std::fabs(pts[idx] - prev);
        prev = pts[idx];
      }
      out.terms[exponent] += config.weight;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  std::erase_if(out.terms, [](const auto& kv) { return kv.second == 0; });
  return out;
}

double kac_observable(const LocalTimeField& field,
                      const PermutationSumSpec& spec) {
  double prod = 1.0;
  const double h = spec.h;
  for (std::size_t j = 0; j < spec.points.size(); ++j) {
    const double x = spec.points[j];
    switch (spec.flag(j)) {
      case 1:
        prod *= field.at(x + h) - field.at(x);
        break;
      case 2:
        prod *= 2.0 * field.at(x) - field.at(x + h) - field.at(x - h);
        break;
      default:
        prod *= field.at(x);
    }
  }
  return prod;
}

}  // namespace loctime
