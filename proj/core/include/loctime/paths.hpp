#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace loctime {

/// Discretized Brownian trajectory on a uniform time mesh.
struct Path {
  double dt = 0.0;
  double start = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> positions;  // positions[0] == start

  std::size_t steps() const noexcept {
    return positions.empty() ? 0 : positions.size() - 1;
  }
  /// dt * (len - 1), exactly as stored.
  double t_end() const noexcept { return dt * static_cast<double>(steps()); }
};

/// Independent exponential killing time with the given rate (mean 1/rate).
struct ExponentialClock {
  double rate = 1.0;
  double sampled_value = 0.0;
};

/// Uniform spatial grid of cells [x_min + i dx, x_min + (i+1) dx).
struct GridSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  double dx = 0.1;

  /// Grid whose cell centers are the integer multiples of dx and which
  /// covers [-half_width, half_width].
  static GridSpec centered(double half_width, double dx);

  std::size_t cells() const;
  double center(std::size_t i) const noexcept {
    return x_min + (static_cast<double>(i) + 0.5) * dx;
  }
  /// Index of the cell holding x. Throws GridExceededError off-grid.
  std::size_t cell_of(double x) const;
  void validate() const;
};

/// Cell-averaged local time {L^x_t}: values[i] is the occupation time of
/// cell i divided by dx.
struct LocalTimeField {
  GridSpec grid;
  std::vector<double> values;
  double t = 0.0;

  /// Local time at the cell holding x.
  double at(double x) const { return values[grid.cell_of(x)]; }
  /// sum(values) * dx, equal to t up to float rounding.
  double occupation() const noexcept;
};

/// Brownian path on [0, t_end] with n = round(t_end / dt) Gaussian steps.
Path simulate_path(double t_end, double dt, double start, std::uint64_t seed);

/// Brownian path run until an independent exponential(rate) time. The clock
/// is drawn first from the seeded stream, then the increments.
std::pair<Path, ExponentialClock> simulate_killed_path(double rate, double dt,
                                                       double start,
                                                       std::uint64_t seed);

/// Exact occupation accounting of the piecewise-linear interpolant of the
/// path. Throws GridExceededError if the path leaves the grid.
LocalTimeField local_time_field(const Path& path, const GridSpec& grid);

/// Same as above, accumulating into a caller-owned buffer (resized to the
/// grid). Avoids one allocation per path in the harness hot loop.
void local_time_field_into(std::span<const double> positions, double dt,
                           const GridSpec& grid, std::vector<double>& values);

/// Smallest and largest position along the path.
std::pair<double, double> path_range(const Path& path) noexcept;

/// sum_i values[i]^p dx, the grid version of the integral of (L^x_t)^p.
double alpha_p(const LocalTimeField& field, int p);

}  // namespace loctime
