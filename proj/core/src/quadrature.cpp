#include "loctime/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "loctime/errors.hpp"

namespace loctime {
namespace {

// Kronrod nodes on [-1, 1] (non-negative half) and weights; every other node
// from index 1 is a Gauss node.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dxj = half * kNodes[j];
    const double pair = f(center - dxj) + f(center + dxj);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, std::span<const double> breaks,
                           const QuadratureOptions& opts) {
  if (breaks.size() < 2) throw ParameterError("need at least two breakpoints");
  std::priority_queue<Panel> heap;
  std::vector<Panel> frozen;
  double total = 0.0;
  double total_err = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i] <= breaks[i + 1])) {
      throw ParameterError("quadrature breakpoints must be sorted");
    }
    if (breaks[i] == breaks[i + 1]) continue;
    Panel p = gauss_kronrod(f, breaks[i], breaks[i + 1]);
    evals += 15;
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  while (!heap.empty()) {
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
    if (total_err <= tol || evals + 30 > opts.max_evaluations) break;
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Cannot be split further in double precision; its error stays in
      // the bound.
      frozen.push_back(worst);
      continue;
    }
    const Panel left = gauss_kronrod(f, worst.a, mid);
    const Panel right = gauss_kronrod(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Recompute from panels to shed accumulated update rounding.
  double value = 0.0;
  double err = 0.0;
  for (const Panel& p : frozen) {
    value += p.value;
    err += p.error;
  }
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {value, std::max(err, 0.0), evals};
}

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opts) {
  const std::array<double, 2> ends{a, b};
  return integrate(f, ends, opts);
}

}  // namespace loctime
