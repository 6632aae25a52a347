#include "loctime/paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "loctime/errors.hpp"

namespace loctime {
namespace {

void require_positive_finite(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ParameterError(std::string(name) + " must be finite and > 0, got " +
                         std::to_string(v));
  }
}

void fill_increments(std::mt19937_64& engine, double dt, std::size_t steps,
                     std::vector<double>& positions) {
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (std::size_t k = 0; k < steps; ++k) {
    positions[k + 1] = positions[k] + normal(engine);
  }
}

}  // namespace

GridSpec GridSpec::centered(double half_width, double dx) {
  require_positive_finite(half_width, "half_width");
  require_positive_finite(dx, "dx");
  const double k = std::ceil(half_width / dx);
  GridSpec g{-(k + 0.5) * dx, (k + 0.5) * dx, dx};
  g.validate();
  return g;
}

std::size_t GridSpec::cells() const {
  return static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
}

void GridSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw ParameterError("grid requires finite x_min < x_max");
  }
  require_positive_finite(dx, "grid dx");
  if (std::llround((x_max - x_min) / dx) < 2) {
    throw ParameterError("grid must have at least 2 cells");
  }
}

std::size_t GridSpec::cell_of(double x) const {
  if (!(x >= x_min && x <= x_max)) {
    throw GridExceededError("position " + std::to_string(x) +
                                " outside grid [" + std::to_string(x_min) +
                                ", " + std::to_string(x_max) + "]",
                            x);
  }
  const auto n = cells();
  const auto i = static_cast<std::size_t>(std::floor((x - x_min) / dx));
  return std::min(i, n - 1);
}

double LocalTimeField::occupation() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.dx;
}

Path simulate_path(double t_end, double dt, double start, std::uint64_t seed) {
  require_positive_finite(t_end, "t_end");
  require_positive_finite(dt, "dt");
  if (!std::isfinite(start)) throw ParameterError("start must be finite");
  if (dt > t_end) throw ParameterError("dt must not exceed t_end");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  Path path{dt, start, seed, std::vector<double>(steps + 1)};
  path.positions[0] = start;
  std::mt19937_64 engine(seed);
  fill_increments(engine, dt, steps, path.positions);
  return path;
}

std::pair<Path, ExponentialClock> simulate_killed_path(double rate, double dt,
                                                       double start,
                                                       std::uint64_t seed) {
  require_positive_finite(rate, "rate");
  require_positive_finite(dt, "dt");
  if (!std::isfinite(start)) throw ParameterError("start must be finite");
  std::mt19937_64 engine(seed);
  std::exponential_distribution<double> expo(rate);
  double lambda = expo(engine);
  // exponential_distribution may return 0 with probability ~2^-53.
  while (lambda <= 0.0) lambda = expo(engine);
  const auto steps = static_cast<std::size_t>(std::llround(lambda / dt));
  Path path{dt, start, seed, std::vector<double>(steps + 1)};
  path.positions[0] = start;
  fill_increments(engine, dt, steps, path.positions);
  return {std::move(path), ExponentialClock{rate, lambda}};
}

std::pair<double, double> path_range(const Path& path) noexcept {
  const auto [lo, hi] =
      std::minmax_element(path.positions.begin(), path.positions.end());
  return {*lo, *hi};
}

void local_time_field_into(std::span<const double> positions, double dt,
                           const GridSpec& grid, std::vector<double>& values) {
  const std::size_t n = grid.cells();
  values.assign(n, 0.0);
  if (positions.empty()) return;
  const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
  grid.cell_of(*lo);  // throws if off-grid
  grid.cell_of(*hi);

  const double inv_dx = 1.0 / grid.dx;
  const double top = static_cast<double>(n) - 1e-9;
  auto to_cells = [&](double x) {
    return std::min((x - grid.x_min) * inv_dx, top);
  };

  double a = to_cells(positions[0]);
  for (std::size_t k = 1; k < positions.size(); ++k) {
    const double b_raw = to_cells(positions[k]);
    double lo_c = a, hi_c = b_raw;
    if (lo_c > hi_c) std::swap(lo_c, hi_c);
    const auto ia = static_cast<std::size_t>(lo_c);
    const auto ib = static_cast<std::size_t>(hi_c);
    if (ia == ib) {
      values[ia] += dt;
    } else {
      // Time spent per unit of cell-length along this linear segment.
      const double rate = dt / (hi_c - lo_c);
      values[ia] += (static_cast<double>(ia + 1) - lo_c) * rate;
      for (std::size_t i = ia + 1; i < ib; ++i) values[i] += rate;
      values[ib] += (hi_c - static_cast<double>(ib)) * rate;
    }
    a = b_raw;
  }
  for (double& v : values) v *= inv_dx;
}

LocalTimeField local_time_field(const Path& path, const GridSpec& grid) {
  grid.validate();
  LocalTimeField field{grid, {}, path.t_end()};
  local_time_field_into(path.positions, path.dt, grid, field.values);
  return field;
}

double alpha_p(const LocalTimeField& field, int p) {
  if (p < 1) throw ParameterError("alpha_p requires p >= 1");
  double s = 0.0;
  for (double v : field.values) {
    double term = v;
    for (int j = 1; j < p; ++j) term *= v;
    s += term;
  }
  return s * field.grid.dx;
}

}  // namespace loctime
