#include "loctime/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "loctime/errors.hpp"
#include "loctime/kernels.hpp"
#include "loctime/quadrature.hpp"

namespace loctime {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> symmetric(std::vector<double> xs) {
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (xs[i] != 0.0) xs.push_back(-xs[i]);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::vector<double> scaled(double h, std::initializer_list<double> multiples,
                           std::initializer_list<double> absolute) {
  std::vector<double> xs;
  for (double m : multiples) xs.push_back(m * h);
  for (double a : absolute) xs.push_back(a);
  return symmetric(std::move(xs));
}

// int w_T(x) dx by evenness: 2 int_0^X of the absolute time integral.
double heat_w_integral(double h, double T) {
  std::vector<double> breaks{0.0};
  for (double b = h; b < 12.0 * std::sqrt(T); b *= 2.0) breaks.push_back(b);
  breaks.push_back(12.0 * std::sqrt(T) + 2.0 * h);
  const QuadratureOptions inner{1e-14 * h * h, 1e-10, 400000};
  const QuadratureOptions outer{1e-12 * h * h, 1e-8, 200000};
  const auto r = integrate(
      [&](double x) {
        return heat_kernel_time_integral(x, T, HeatMode::diff_hh, h, true, inner)
            .value;
      },
      breaks, outer);
  return 2.0 * r.value;
}

}  // namespace

const std::vector<BoundKind>& all_bound_kinds() {
  static const std::vector<BoundKind> kinds{
      BoundKind::potential_diff_h, BoundKind::potential_diff_hh,
      BoundKind::heat_v,           BoundKind::heat_w,
      BoundKind::heat_w_integral,  BoundKind::sup_u,
      BoundKind::sup_v,            BoundKind::sup_w};
  return kinds;
}

std::string calibration_key(BoundKind kind) {
  switch (kind) {
    case BoundKind::potential_diff_h: return "potential.diff_h";
    case BoundKind::potential_diff_hh: return "potential.diff_hh";
    case BoundKind::heat_v: return "heat.v_T";
    case BoundKind::heat_w: return "heat.w_T";
    case BoundKind::heat_w_integral: return "heat.w_T_integral";
    case BoundKind::sup_u: return "heat.sup_u";
    case BoundKind::sup_v: return "heat.sup_v";
    case BoundKind::sup_w: return "heat.sup_w";
  }
  return "";
}

std::string calibration_anchor(BoundKind kind) {
  switch (kind) {
    case BoundKind::potential_diff_h:
      return "potential.first_difference_bound: |D^h u(x)| <= C h u(x) for |x| >= h";
    case BoundKind::potential_diff_hh:
      return "potential.second_difference_bound: |D^h D^-h u(x)| <= C h^2 u(x) for |x| >= h";
    case BoundKind::heat_v:
      return "heat.time_integral_first_difference: v_T(x) <= C_T h e^{-|x|}";
    case BoundKind::heat_w:
      return "heat.time_integral_second_difference: w_T(x) <= C_T h^2 e^{-x^2/32T}/|x| for |x| >= 2h";
    case BoundKind::heat_w_integral:
      return "heat.time_integral_second_difference_mass: int w_T dx <= C_T h^2 |log h|";
    case BoundKind::sup_u:
      return "heat.sup_kernel: sup_{delta<=t<=T} p_t(x) <= C_{delta,T} e^{-x^2/2T}";
    case BoundKind::sup_v:
      return "heat.sup_first_difference: sup |D^h p_t(x)| <= C_{delta,T} h e^{-x^2/2T}";
    case BoundKind::sup_w:
      return "heat.sup_second_difference: sup |D^h D^-h p_t(x)| <= C_{delta,T} h^2 e^{-x^2/2T}";
  }
  return "";
}

std::vector<double> bound_samples(BoundKind kind, double h) {
  switch (kind) {
    case BoundKind::potential_diff_h:
    case BoundKind::potential_diff_hh:
      return scaled(h, {1, 1.5, 2, 3, 5, 10}, {0.5, 1, 2, 5, 10});
    case BoundKind::heat_v:
      return scaled(h, {0, 0.25, 0.5, 1, 2, 5}, {0.25, 0.5, 1, 2, 3, 5});
    case BoundKind::heat_w:
      return scaled(h, {2, 3, 4, 6, 10, 20}, {0.25, 0.5, 1, 2, 3, 5});
    case BoundKind::heat_w_integral:
      return {};
    case BoundKind::sup_u:
    case BoundKind::sup_v:
    case BoundKind::sup_w: {
      std::vector<double> xs;
      for (int i = 0; i <= 20; ++i) xs.push_back(0.25 * i);
      for (double m : {0.5, 1.0, 2.0}) xs.push_back(m * h);
      return symmetric(std::move(xs));
    }
  }
  return {};
}

double bound_ratio(BoundKind kind, double h, const CalibrationPoint& point) {
  if (!(h > 0.0) || h >= 1.0) throw ParameterError("bound_ratio: h must be in (0, 1)");
  const double a = point.alpha;
  const double T = point.T;
  const auto u = [a](double x) { return u_alpha(x, a); };
  if (kind == BoundKind::heat_w_integral) {
    return heat_w_integral(h, T) / (h * h * std::fabs(std::log(h)));
  }
  double worst = 0.0;
  for (double x : bound_samples(kind, h)) {
    double r = 0.0;
    switch (kind) {
      case BoundKind::potential_diff_h:
        r = std::fabs(diff_h(u, x, h)) / (h * u(x));
        break;
      case BoundKind::potential_diff_hh:
        r = std::fabs(diff_hh(u, x, h)) / (h * h * u(x));
        break;
      case BoundKind::heat_v:
        r = heat_kernel_time_integral(x, T, HeatMode::diff_h, h, true).value /
            (h * std::exp(-std::fabs(x)));
        break;
      case BoundKind::heat_w:
        r = heat_kernel_time_integral(x, T, HeatMode::diff_hh, h, true).value /
            (h * h * std::exp(-x * x / (32.0 * T)) / std::fabs(x));
        break;
      case BoundKind::sup_u:
      case BoundKind::sup_v:
      case BoundKind::sup_w: {
        const HeatSup s = sup_heat_bounds(point.delta, T, h, x);
        const double env = std::exp(-x * x / (2.0 * T));
        r = kind == BoundKind::sup_u   ? s.u / env
            : kind == BoundKind::sup_v ? s.v / (h * env)
                                       : s.w / (h * h * env);
        break;
      }
      case BoundKind::heat_w_integral:
        break;
    }
    worst = std::max(worst, r);
  }
  return worst;
}

double Calibration::constant(BoundKind kind) const {
  const auto it = constants.find(calibration_key(kind));
  if (it == constants.end()) {
    throw ConfigError("calibration constant '" + calibration_key(kind) + "' is missing");
  }
  return it->second;
}

bool Calibration::holds(BoundKind kind, double h) const {
  return bound_ratio(kind, h, point) <= constant(kind);
}

Calibration fit_calibration(const CalibrationPoint& point, double safety_factor) {
  Calibration c;
  c.point = point;
  c.safety_factor = safety_factor;
  for (BoundKind k : all_bound_kinds()) {
    c.constants[calibration_key(k)] = safety_factor * bound_ratio(k, point.h, point);
  }
  return c;
}

std::string render_calibration(const Calibration& c) {
  std::ostringstream out;
  out << "# Frozen bound constants: max normalized ratio at the fit point times\n"
      << "# the safety factor. Regenerate with `loctime calibrate --force`.\n"
      << "alpha = " << fmt(c.point.alpha) << "\n"
      << "T = " << fmt(c.point.T) << "\n"
      << "delta = " << fmt(c.point.delta) << "\n"
      << "fit_h = " << fmt(c.point.h) << "\n"
      << "safety_factor = " << fmt(c.safety_factor) << "\n";
  for (BoundKind k : all_bound_kinds()) {
    const auto it = c.constants.find(calibration_key(k));
    if (it == c.constants.end()) continue;
    out << "\n# anchor: " << calibration_anchor(k) << "\n"
        << it->first << " = " << fmt(it->second) << "\n";
  }
  return out.str();
}

Calibration parse_calibration(std::istream& in) {
  Calibration c;
  c.constants.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw ConfigError("calibration line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    double value = 0.0;
    try {
      value = std::stod(trim(line.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ConfigError("calibration key '" + key + "': not a number");
    }
    if (key == "alpha") c.point.alpha = value;
    else if (key == "T") c.point.T = value;
    else if (key == "delta") c.point.delta = value;
    else if (key == "fit_h") c.point.h = value;
    else if (key == "safety_factor") c.safety_factor = value;
    else c.constants[key] = value;
  }
  return c;
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file '" + path + "'");
  return parse_calibration(in);
}

}  // namespace loctime
