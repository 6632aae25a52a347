#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace loctime {

/// Existence bounds turned into regression checks. Each kind names a
/// normalized ratio |quantity| / envelope whose maximum over sampled x is
/// bounded uniformly in h; the constant is fitted once and then frozen.
enum class BoundKind {
  potential_diff_h,    // |D^h u(x)| <= C h u(x), |x| >= h
  potential_diff_hh,   // |D^h D^-h u(x)| <= C h^2 u(x), |x| >= h
  heat_v,              // int_0^T |D^h p_t(x)| dt <= C h e^{-|x|}
  heat_w,              // int_0^T |D^h D^-h p_t(x)| dt <= C h^2 e^{-x^2/32T}/|x|, |x| >= 2h
  heat_w_integral,     // int w_T(x) dx <= C h^2 |log h|
  sup_u,               // sup_{delta<=t<=T} p_t(x) <= C e^{-x^2/2T}
  sup_v,               // sup |D^h p_t(x)| <= C h e^{-x^2/2T}
  sup_w,               // sup |D^h D^-h p_t(x)| <= C h^2 e^{-x^2/2T}
};

const std::vector<BoundKind>& all_bound_kinds();
std::string calibration_key(BoundKind kind);
std::string calibration_anchor(BoundKind kind);

/// Fixed parameters of the bounds: potential rate, heat horizon, sup window.
struct CalibrationPoint {
  double alpha = 0.5;
  double T = 1.0;
  double delta = 0.1;
  double h = 0.1;  // lag at which constants are fitted
};

/// Max over the kind's sampled x-grid of the normalized ratio at lag h.
double bound_ratio(BoundKind kind, double h, const CalibrationPoint& point = {});

/// The x-samples used for a kind at lag h.
std::vector<double> bound_samples(BoundKind kind, double h);

struct Calibration {
  CalibrationPoint point;
  double safety_factor = 1.5;
  std::map<std::string, double> constants;  // calibration_key -> C

  double constant(BoundKind kind) const;
  /// bound_ratio(kind, h) <= constant(kind).
  bool holds(BoundKind kind, double h) const;
};

Calibration fit_calibration(const CalibrationPoint& point = {},
                            double safety_factor = 1.5);

/// key = value text; '#' comments carry the anchor of each constant.
std::string render_calibration(const Calibration& calibration);
Calibration parse_calibration(std::istream& in);
Calibration load_calibration(const std::string& path);

}  // namespace loctime
