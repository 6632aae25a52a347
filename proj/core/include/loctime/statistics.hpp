#pragma once

#include <span>
#include <vector>

#include "loctime/moments.hpp"
#include "loctime/paths.hpp"

namespace loctime {

enum class StatisticKind { second, third, fourth };

struct StatisticSample {
  StatisticKind kind = StatisticKind::second;
  double h = 0.0;
  double t = 0.0;
  double value = 0.0;
  double alpha_companion = 0.0;  // alpha_{p,t} with p = 2, 3, 4
};

/// c_q = sqrt(2^{2q+1} q! / (q + 1)).
struct LimitConstant {
  int q = 2;
  double c_q = 0.0;
};

/// Bracketing of the 48 h^2 term in the fourth-moment centering.
enum class FourthCentering {
  joint,  // 48 h^2 * int [L^2 - (Delta L) L] dx
  split,  // 48 h^2 * int L^2 dx - int (Delta L) L dx
};

/// Lag in cells for h on the field's grid. Throws ParameterError unless h is
/// an integer multiple of dx to 1e-12 relative.
std::size_t lag_cells(const GridSpec& grid, double h);

/// Delta^h L^x_t per cell; cells whose x + h leaves the grid read L = 0 there.
std::vector<double> increment_field(const LocalTimeField& field, double h);

/// Every grid integral the statistics need, from a single pass.
struct IncrementFunctionals {
  double h = 0.0;
  double t = 0.0;
  double d2 = 0.0;     // int (Delta L)^2
  double d3 = 0.0;     // int (Delta L)^3
  double d4 = 0.0;     // int (Delta L)^4
  double dl = 0.0;     // int (Delta L) L
  double d2l = 0.0;    // int (Delta L)^2 L
  double l2 = 0.0;     // int L^2
  double l3 = 0.0;     // int L^3
  double l4 = 0.0;     // int L^4
};

IncrementFunctionals increment_functionals(const LocalTimeField& field,
                                           double h);
IncrementFunctionals increment_functionals(std::span<const double> values,
                                           const GridSpec& grid, double t,
                                           double h);

/// [int (Delta L)^2 - 4 h t] / h^{3/2}
double second_statistic_value(const IncrementFunctionals& f);
/// [int (Delta L)^3 - 12 h int (Delta L) L - 24 h^2 t] / h^2
double third_statistic_value(const IncrementFunctionals& f);
/// [int (Delta L)^4 - 24 h int (Delta L)^2 L + 48 h^2 (...)] / h^{5/2}
double fourth_statistic_value(const IncrementFunctionals& f,
                              FourthCentering centering = FourthCentering::joint);

StatisticSample second_moment_statistic(const LocalTimeField& field, double h);
StatisticSample third_moment_statistic(const LocalTimeField& field, double h);
StatisticSample fourth_moment_statistic(
    const LocalTimeField& field, double h,
    FourthCentering centering = FourthCentering::joint);

LimitConstant limit_constant(int q);

/// Moment of order m of the mixed normal c sqrt(A) eta, A sampled by
/// alpha_samples: (2n)!/(2^n n!) c^{2n} mean(A^n) for m = 2n, 0 for odd m.
MomentEstimate mixed_normal_moment(int m, double c,
                                   std::span<const double> alpha_samples);

}  // namespace loctime
