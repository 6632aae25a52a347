#include "loctime/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "loctime/errors.hpp"
#include "loctime/kac.hpp"
#include "loctime/kernels.hpp"
#include "loctime/paths.hpp"
#include "loctime/rng.hpp"
#include "loctime/statistics.hpp"
#include "loctime/version.hpp"

namespace loctime {
namespace {

constexpr const char* kToleranceNote =
    "Finite-h gates (relative bands, ratio windows, 3-SE z gates) are "
    "engineering choices; the limit statements fix only the h -> 0 behavior.";

// Column view of the row-major result matrix.
class Columns {
 public:
  Columns(const std::vector<double>& m, std::size_t rows, std::size_t width)
      : m_(m), rows_(rows), width_(width) {}
  std::vector<double> col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = m_[i * width_ + j];
    return out;
  }
  std::size_t rows() const { return rows_; }

 private:
  const std::vector<double>& m_;
  std::size_t rows_, width_;
};

std::vector<double> apply(const std::vector<double>& xs, auto&& f) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = f(xs[i], i);
  return out;
}

MomentEstimate estimate(std::span<const double> xs) {
  return MomentEstimate::from_samples(xs);
}

std::string num(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

Check z_check(std::string name, std::string anchor, double h,
              const MomentEstimate& est, double oracle, double oracle_se,
              const TolerancePolicy& tol, bool gating = true) {
  const Verdict v = compare_to_oracle(est, oracle, oracle_se, tol);
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.h = h;
  c.estimate = est.mean;
  c.estimate_se = est.std_error;
  c.oracle = oracle;
  c.oracle_se = oracle_se;
  c.z = v.z;
  c.ratio = oracle != 0.0 ? est.mean / oracle : 0.0;
  c.gate = "|z| <= " + num(tol.z_gate);
  c.pass = v.pass;
  c.gating = gating;
  return c;
}

Check band_check(std::string name, std::string anchor, double h, double value,
                 double lo, double hi, bool gating = true) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.h = h;
  c.estimate = value;
  c.oracle = 1.0;
  c.ratio = value;
  c.gate = "ratio in [" + num(lo) + ", " + num(hi) + "]";
  c.pass = value >= lo && value <= hi;
  c.gating = gating;
  return c;
}

// Ratio of paired means mean(a)/mean(b) with a delta-method standard error.
struct RatioEstimate {
  double ratio;
  double se;
};

RatioEstimate paired_ratio(const std::vector<double>& a,
                           const std::vector<double>& b) {
  const auto ea = estimate(a);
  const auto eb = estimate(b);
  const double n = static_cast<double>(a.size());
  CompensatedSum cov;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov.add((a[i] - ea.mean) * (b[i] - eb.mean));
  }
  const double c = cov.value() / (n - 1.0) / n;  // cov of the two means
  const double r = ea.mean / eb.mean;
  const double rel2 = ea.std_error * ea.std_error / (ea.mean * ea.mean) +
                      eb.std_error * eb.std_error / (eb.mean * eb.mean) -
                      2.0 * c / (ea.mean * eb.mean);
  return {r, std::fabs(r) * std::sqrt(std::max(rel2, 0.0))};
}

// Local time field of a path on the config grid, widening the grid by
// 2 sqrt(t) per retry until the path fits.
struct FieldBuilder {
  const ExperimentConfig& config;
  double horizon;

  std::size_t build(const Path& path, std::vector<double>& values,
                    GridSpec& grid) const {
    grid = config.grid_for(horizon);
    std::size_t retries = 0;
    const double widen = 2.0 * std::sqrt(std::max(horizon, path.t_end()));
    while (true) {
      try {
        local_time_field_into(path.positions, path.dt, grid, values);
        return retries;
      } catch (const GridExceededError&) {
        ++retries;
        const double hw = -grid.x_min + widen - 0.5 * grid.dx;
        grid = GridSpec::centered(hw, grid.dx);
        if (retries > 1000) throw;
      }
    }
  }
};

double occupation_error(std::span<const double> values, double dx, double t) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  const double occ = s.value() * dx;
  return t > 0.0 ? std::fabs(occ - t) / t : std::fabs(occ);
}

void finish_common(ExperimentReport& report, const std::vector<double>& retry,
                   const std::vector<double>& occ_err) {
  const auto& tol = report.config.tolerance;
  std::size_t retries = 0;
  std::size_t retried_paths = 0;
  for (double r : retry) {
    retries += static_cast<std::size_t>(r);
    if (r > 0) ++retried_paths;
  }
  report.retries = retries;
  const double frac =
      retry.empty() ? 0.0
                    : static_cast<double>(retried_paths) / retry.size();
  report.degraded = frac > tol.degraded_retry_fraction;
  if (!occ_err.empty()) {
    const double worst = *std::max_element(occ_err.begin(), occ_err.end());
    Check c;
    c.name = "occupation_identity_every_path";
    c.anchor = "occupation.total_local_time_equals_time";
    c.estimate = worst;
    c.oracle = 0.0;
    c.gate = "max |sum(L) dx - t| / t <= " + num(tol.occupation_relative);
    c.pass = worst <= tol.occupation_relative;
    report.checks.push_back(c);
  }
}

// ---------------------------------------------------------------- CLT kinds

void run_clt(const ExperimentConfig& config, int p, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  const std::size_t H = config.h_list.size();
  const std::size_t width = 3 * H + 2;  // per h: X, alpha, aux; retry; occ
  const FieldBuilder builder{config, config.t};
  const auto centering = config.fourth_split_centering ? FourthCentering::split
                                                       : FourthCentering::joint;
  std::vector<double> matrix;
  parallel_rows(
      config.n_paths, width, resolve_threads(config.threads),
      [&](std::size_t i, std::span<double> out) {
        const Path path = simulate_path(config.t, config.dt, 0.0,
                                        derive_seed(config.base_seed, i));
        thread_local std::vector<double> values;
        GridSpec grid;
        out[3 * H] = static_cast<double>(builder.build(path, values, grid));
        out[3 * H + 1] = occupation_error(values, grid.dx, path.t_end());
        for (std::size_t k = 0; k < H; ++k) {
          const auto f = increment_functionals(values, grid, path.t_end(),
                                               config.h_list[k]);
          switch (p) {
            case 2:
              out[3 * k] = second_statistic_value(f);
              out[3 * k + 1] = f.l2;
              out[3 * k + 2] = f.d2;
              break;
            case 3:
              out[3 * k] = third_statistic_value(f);
              out[3 * k + 1] = f.l3;
              out[3 * k + 2] = f.d3 - 12.0 * f.h * f.dl - 24.0 * f.h * f.h * f.t;
              break;
            default:
              out[3 * k] = fourth_statistic_value(f, centering);
              out[3 * k + 1] = f.l4;
              out[3 * k + 2] = f.d4;
          }
        }
      },
      matrix);

  const Columns cols(matrix, config.n_paths, width);
  const double c2 = std::pow(limit_constant(p).c_q, 2);
  const bool gating = p != 4;
  const std::string tag = p == 2 ? "clt2" : p == 3 ? "clt3" : "clt4";
  const std::string anchor = p == 2   ? "clt2.mixed_normal_limit_c2_64_over_3"
                             : p == 3 ? "clt3.mixed_normal_limit_c2_192"
                                      : "clt4.conjecture_c4_sq_2457.6";
  std::vector<double> var_ratio_by_h;
  for (std::size_t k = 0; k < H; ++k) {
    const double h = config.h_list[k];
    const auto X = cols.col(3 * k);
    const auto A = cols.col(3 * k + 1);
    const auto aux = cols.col(3 * k + 2);
    const auto ex = estimate(X);
    const auto ea = estimate(A);
    const double n = static_cast<double>(X.size());

    LagRow row;
    row.h = h;
    row.estimates["statistic"] = ex;
    row.estimates["alpha_companion"] = ea;
    row.estimates["statistic_sq"] =
        estimate(apply(X, [](double x, std::size_t) { return x * x; }));
    row.estimates["statistic_cube"] =
        estimate(apply(X, [](double x, std::size_t) { return x * x * x; }));
    row.estimates["raw_functional"] = estimate(aux);

    report.checks.push_back(
        z_check(tag + "_mean_zero", anchor + ".odd_moments_vanish", h, ex, 0.0,
                0.0, tol, gating));

    // Paired difference: sample variance minus c^2 alpha, per path.
    const auto D = apply(X, [&](double x, std::size_t i) {
      return (x - ex.mean) * (x - ex.mean) * n / (n - 1.0) - c2 * A[i];
    });
    const auto ed = estimate(D);
    const double limit = c2 * ea.mean;
    const double var = ex.variance();
    Check vc;
    vc.name = tag + "_variance_vs_limit";
    vc.anchor = anchor;
    vc.h = h;
    vc.estimate = var;
    vc.estimate_se = ed.std_error;
    vc.oracle = limit;
    vc.oracle_se = c2 * ea.std_error;
    vc.z = ed.std_error > 0 ? ed.mean / ed.std_error : 0.0;
    vc.ratio = var / limit;
    vc.gate = "|ratio - 1| <= " + num(tol.clt_relative) +
              " or |z| <= " + num(tol.z_gate);
    vc.pass = std::fabs(vc.ratio - 1.0) <= tol.clt_relative ||
              std::fabs(vc.z) <= tol.z_gate;
    vc.gating = gating;
    report.checks.push_back(vc);
    var_ratio_by_h.push_back(vc.ratio);
    row.estimates["variance_minus_limit"] = ed;

    const auto e3 = row.estimates["statistic_cube"];
    report.checks.push_back(z_check(tag + "_third_moment_zero",
                                    anchor + ".odd_moments_vanish", h, e3, 0.0,
                                    0.0, tol, p == 3));

    // Fourth moment against 3 c^4 E[alpha^2]; reported only.
    const auto X4 = apply(X, [](double x, std::size_t) { return x * x * x * x; });
    const auto A2 = apply(A, [&](double a, std::size_t) { return 3.0 * c2 * c2 * a * a; });
    const auto r4 = paired_ratio(X4, A2);
    Check fc = band_check(tag + "_fourth_moment_ratio", anchor + ".even_moments",
                          h, r4.ratio, 1.0 - 3.0 * tol.clt_relative,
                          1.0 + 3.0 * tol.clt_relative, false);
    fc.estimate_se = r4.se;
    report.checks.push_back(fc);

    if (p == 2) {
      const auto ed2 = estimate(aux);
      report.checks.push_back(z_check("clt2_centering_4ht",
                                      "clt2.centering_term_4ht", h, ed2,
                                      4.0 * h * config.t, 0.0, tol, false));
    }
    report.rows.push_back(std::move(row));
  }
  if (p == 4 && H >= 2) {
    // Trend of |variance ratio - 1| from the largest to the smallest h.
    std::vector<std::pair<double, double>> by_h;
    for (std::size_t k = 0; k < H; ++k) {
      by_h.emplace_back(config.h_list[k], std::fabs(var_ratio_by_h[k] - 1.0));
    }
    std::sort(by_h.begin(), by_h.end());
    Check tc;
    tc.name = "clt4_variance_ratio_trend";
    tc.anchor = anchor;
    tc.h = by_h.front().first;
    tc.estimate = by_h.front().second;
    tc.oracle = by_h.back().second;
    tc.gate = "|ratio - 1| at smallest h below that at largest h";
    tc.pass = by_h.front().second < by_h.back().second;
    tc.gating = false;
    report.checks.push_back(tc);
  }
  finish_common(report, cols.col(3 * H), cols.col(3 * H + 1));
}

// ------------------------------------------------------------------ scaling

void run_scaling(const ExperimentConfig& config, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  const int p = config.p;
  std::vector<double> all_retry, all_occ;
  for (double h : config.h_list) {
    // Side A: lag h at horizon t. Side B: lag 1 at horizon t / h^2 with the
    // mesh scaled so the two discretizations are images of each other.
    ExperimentConfig a = config;
    ExperimentConfig b = config;
    b.t = config.t / (h * h);
    b.dt = config.dt / (h * h);
    b.dx = config.dx / h;
    b.half_width = config.half_width > 0 ? config.half_width / h : 0.0;
    const std::uint64_t seed_a = substream(config.base_seed, 1);
    const std::uint64_t seed_b = substream(config.base_seed, 2);
    const FieldBuilder fa{a, a.t};
    const FieldBuilder fb{b, b.t};
    constexpr std::size_t width = 6;  // P, cross, retry, occ for each side
    std::vector<double> ma, mb;
    auto side = [&](const ExperimentConfig& cfg, const FieldBuilder& fbld,
                    std::uint64_t seed, double lag, double scale_p,
                    double scale_cross, std::vector<double>& m) {
      parallel_rows(
          config.n_paths, width, resolve_threads(config.threads),
          [&](std::size_t i, std::span<double> out) {
            const Path path =
                simulate_path(cfg.t, cfg.dt, 0.0, derive_seed(seed, i));
            thread_local std::vector<double> values;
            GridSpec grid;
            out[2] = static_cast<double>(fbld.build(path, values, grid));
            out[3] = occupation_error(values, grid.dx, path.t_end());
            const std::size_t k = lag_cells(grid, lag);
            const std::size_t n = values.size();
            CompensatedSum sp, sc;
            for (std::size_t j = 0; j < k && j < n; ++j) {
              sp.add(std::pow(values[j], p));
            }
            for (std::size_t j = 0; j < n; ++j) {
              const double d = (j + k < n ? values[j + k] : 0.0) - values[j];
              sp.add(std::pow(d, p));
              sc.add(d * values[j]);
            }
            out[0] = scale_p * sp.value() * grid.dx;
            out[1] = scale_cross * sc.value() * grid.dx;
          },
          m);
    };
    side(a, fa, seed_a, h, 1.0, 1.0, ma);
    side(b, fb, seed_b, 1.0, std::pow(h, p + 1), std::pow(h, 3), mb);
    const Columns ca(ma, config.n_paths, width);
    const Columns cb(mb, config.n_paths, width);

    LagRow row;
    row.h = h;
    const auto pa = estimate(ca.col(0));
    const auto pb = estimate(cb.col(0));
    const auto xa = estimate(ca.col(1));
    const auto xb = estimate(cb.col(1));
    row.estimates["power_lag_h"] = pa;
    row.estimates["power_lag_1_scaled"] = pb;
    row.estimates["cross_lag_h"] = xa;
    row.estimates["cross_lag_1_scaled"] = xb;
    report.checks.push_back(z_check(
        "scaling_power_p" + std::to_string(p), "scaling.power_moment_h_pow_p_plus_1",
        h, pa, pb.mean, pb.std_error, tol));
    report.checks.push_back(z_check("scaling_cross_term",
                                    "scaling.cross_term_h_cubed", h, xa,
                                    xb.mean, xb.std_error, tol));
    report.rows.push_back(std::move(row));
    for (const auto* c : {&ca, &cb}) {
      const auto r = c->col(2);
      const auto o = c->col(3);
      all_retry.insert(all_retry.end(), r.begin(), r.end());
      all_occ.insert(all_occ.end(), o.begin(), o.end());
    }
  }
  finish_common(report, all_retry, all_occ);
}

// --------------------------------------------------------------- kac oracle

void run_kac_oracle(const ExperimentConfig& config, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  const double zeta = *config.zeta;
  auto specs = config.kac_specs;
  for (auto& s : specs) {
    s.alpha = zeta;
    s.start = config.start;
  }
  const std::size_t S = specs.size();
  const std::size_t width = S + 3;  // observables, occupation, retry, occ err
  std::vector<double> matrix;
  parallel_rows(
      config.n_paths, width, resolve_threads(config.threads),
      [&](std::size_t i, std::span<double> out) {
        const auto [path, clock] = simulate_killed_path(
            zeta, config.dt, config.start, derive_seed(config.base_seed, i));
        const double horizon = std::max(path.t_end(), 1.0 / zeta);
        ExperimentConfig local = config;
        // Killed paths have random horizons; size the grid per path.
        local.half_width =
            std::max(config.half_width, 6.0 * std::sqrt(horizon)) +
            std::fabs(config.start);
        const FieldBuilder builder{local, horizon};
        LocalTimeField field;
        field.t = path.t_end();
        out[S + 1] =
            static_cast<double>(builder.build(path, field.values, field.grid));
        for (std::size_t k = 0; k < S; ++k) {
          out[k] = kac_observable(field, specs[k]);
        }
        out[S] = field.occupation();
        out[S + 2] = occupation_error(field.values, field.grid.dx, field.t);
      },
      matrix);
  const Columns cols(matrix, config.n_paths, width);

  LagRow row;
  row.h = 0.0;
  for (std::size_t k = 0; k < S; ++k) {
    const auto est = estimate(cols.col(k));
    const double exact = kac_increment_moment(specs[k]).value;
    const std::string label = "kac_spec[" + format_kac_specs({specs[k]}) + "]";
    row.estimates[label] = est;
    report.checks.push_back(z_check(label, "kac.moment_formula_exponential_time",
                                    specs[k].h, est, exact, 0.0, tol));
  }
  const auto occ = estimate(cols.col(S));
  row.estimates["occupation_total"] = occ;
  report.checks.push_back(z_check("exp_time_occupation_mean",
                                  "occupation.total_local_time_equals_killing_time",
                                  0.0, occ, 1.0 / zeta, 0.0, tol));
  report.rows.push_back(std::move(row));

  // Hand-enumerated closed forms (n = 1 and n = 2 at the origin).
  auto exact_check = [&](std::string name, double got, double want) {
    Check c;
    c.name = std::move(name);
    c.anchor = "kac.moment_formula_closed_forms";
    c.estimate = got;
    c.oracle = want;
    c.ratio = got / want;
    c.gate = "relative error <= " + num(tol.exact_relative);
    c.pass = std::fabs(got - want) <= tol.exact_relative * std::fabs(want);
    report.checks.push_back(c);
  };
  for (double x : {0.0, 0.5, -1.25}) {
    const PermutationSumSpec one{{x}, zeta, 0.0, {}, 0.0};
    exact_check("kac_n1_x=" + num(x), kac_moment(one).value,
                u_alpha(x, zeta));
  }
  const PermutationSumSpec two{{0.0, 0.0}, zeta, 0.0, {}, 0.0};
  exact_check("kac_n2_origin", kac_moment(two).value,
              2.0 * std::pow(u_alpha(0.0, zeta), 2));
  finish_common(report, cols.col(S + 1), cols.col(S + 2));
}

// ------------------------------------------------- exponential-time moments

void run_exp_time(const ExperimentConfig& config, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  const double zeta = *config.zeta;
  const std::size_t H = config.h_list.size();
  const std::size_t width = 2 * H + 3;  // per h: Y, alpha3; occ; retry; err
  std::vector<double> matrix;
  parallel_rows(
      config.n_paths, width, resolve_threads(config.threads),
      [&](std::size_t i, std::span<double> out) {
        const auto [path, clock] = simulate_killed_path(
            zeta, config.dt, 0.0, derive_seed(config.base_seed, i));
        const double horizon = std::max(path.t_end(), 1.0 / zeta);
        ExperimentConfig local = config;
        local.half_width = std::max(config.half_width, 6.0 * std::sqrt(horizon));
        const FieldBuilder builder{local, horizon};
        thread_local std::vector<double> values;
        GridSpec grid;
        out[2 * H + 1] = static_cast<double>(builder.build(path, values, grid));
        const double t = path.t_end();
        for (std::size_t k = 0; k < H; ++k) {
          const double h = config.h_list[k];
          const double w0 = u_hh_at_zero(zeta, h);
          const auto f = increment_functionals(values, grid, t, h);
          // int L dx = t exactly for the occupation estimator.
          out[2 * k] = (f.d3 - 6.0 * w0 * f.dl - 6.0 * w0 * w0 * t) / (h * h);
          out[2 * k + 1] = f.l3;
        }
        out[2 * H] = t;
        out[2 * H + 2] = occupation_error(values, grid.dx, t);
      },
      matrix);
  const Columns cols(matrix, config.n_paths, width);
  for (std::size_t k = 0; k < H; ++k) {
    const double h = config.h_list[k];
    const auto Y = cols.col(2 * k);
    const auto A = cols.col(2 * k + 1);
    LagRow row;
    row.h = h;
    const auto ey = estimate(Y);
    row.estimates["statistic"] = ey;
    row.estimates["alpha3"] = estimate(A);
    report.checks.push_back(z_check("exp_time_first_moment_zero",
                                    "exp_time.limit_moments_odd_vanish", h, ey,
                                    0.0, 0.0, tol));
    const auto Y2 = apply(Y, [](double y, std::size_t) { return y * y; });
    const auto L2 = apply(A, [](double a, std::size_t) { return 192.0 * a; });
    const auto r = paired_ratio(Y2, L2);
    row.estimates["statistic_sq"] = estimate(Y2);
    Check c = band_check("exp_time_second_moment_ratio",
                         "exp_time.limit_moments_even_192", h, r.ratio,
                         tol.moment_ratio_lo, tol.moment_ratio_hi);
    c.estimate_se = r.se;
    report.checks.push_back(c);
    report.rows.push_back(std::move(row));
  }
  const auto occ = estimate(cols.col(2 * H));
  report.checks.push_back(z_check("exp_time_occupation_mean",
                                  "occupation.total_local_time_equals_killing_time",
                                  0.0, occ, 1.0 / zeta, 0.0, tol));
  finish_common(report, cols.col(2 * H + 1), cols.col(2 * H + 2));
}

// -------------------------------------------------------- variance identity

void run_variance_identity(const ExperimentConfig& config,
                           ExperimentReport& report) {
  const auto& tol = config.tolerance;
  const std::size_t H = config.h_list.size();
  const std::size_t width = 2 * H + 4;  // per h: Y^2, Z; retries; occ errs
  const double horizon = std::max(config.t, config.s);
  const FieldBuilder builder{config, horizon};
  const std::uint64_t seed_a = substream(config.base_seed, 1);
  const std::uint64_t seed_b = substream(config.base_seed, 2);
  std::vector<double> matrix;
  parallel_rows(
      config.n_paths, width, resolve_threads(config.threads),
      [&](std::size_t i, std::span<double> out) {
        const Path pa = simulate_path(config.t, config.dt, 0.0,
                                      derive_seed(seed_a, i));
        const double dt_b = std::min(config.dt, config.s);
        const Path pb = simulate_path(config.s, dt_b, 0.0, derive_seed(seed_b, i));
        thread_local std::vector<double> la, lb;
        GridSpec ga, gb;
        out[2 * H] = static_cast<double>(builder.build(pa, la, ga));
        out[2 * H + 1] = static_cast<double>(builder.build(pb, lb, gb));
        out[2 * H + 2] = occupation_error(la, ga.dx, pa.t_end());
        out[2 * H + 3] = occupation_error(lb, gb.dx, pb.t_end());
        // Put both fields on the wider of the two grids.
        const GridSpec grid = ga.cells() >= gb.cells() ? ga : gb;
        auto embed = [&](std::vector<double>& v, const GridSpec& g) {
          if (g.cells() == grid.cells()) return;
          const std::size_t off = (grid.cells() - g.cells()) / 2;
          std::vector<double> w(grid.cells(), 0.0);
          std::copy(v.begin(), v.end(), w.begin() + static_cast<long>(off));
          v.swap(w);
        };
        embed(la, ga);
        embed(lb, gb);
        const std::size_t n = grid.cells();
        for (std::size_t k = 0; k < H; ++k) {
          const double h = config.h_list[k];
          const std::size_t lag = lag_cells(grid, h);
          CompensatedSum y, z;
          for (std::size_t j = 0; j < n; ++j) {
            const double d = (j + lag < n ? la[j + lag] : 0.0) - la[j];
            const double dt_ = (j + lag < n ? lb[j + lag] : 0.0) - lb[j];
            y.add((d * d - 4.0 * h * la[j]) * dt_);
            z.add(la[j] * la[j] * lb[j]);
          }
          // Cells left of the grid: L = 0 there, L^{x+h} may not be.
          for (std::size_t j = 0; j < lag && j < n; ++j) {
            y.add(la[j] * la[j] * lb[j]);
          }
          const double yv = y.value() * grid.dx;
          out[2 * k] = yv * yv;
          out[2 * k + 1] = 32.0 * std::pow(h, 4) * z.value() * grid.dx;
        }
      },
      matrix);
  const Columns cols(matrix, config.n_paths, width);
  const bool degenerate = config.s <= 1e-3 * config.t;
  std::vector<std::pair<double, double>> err_by_h;
  for (std::size_t k = 0; k < H; ++k) {
    const double h = config.h_list[k];
    const auto lhs = cols.col(2 * k);
    const auto rhs = cols.col(2 * k + 1);
    LagRow row;
    row.h = h;
    const auto el = estimate(lhs);
    const auto er = estimate(rhs);
    row.estimates["lhs_second_moment"] = el;
    row.estimates["rhs_32h4_E_int_L2_Ltilde"] = er;
    if (degenerate) {
      // Both sides vanish as s -> 0; compare against the natural scale
      // 32 h^4 t sqrt(s).
      const double scale = 32.0 * std::pow(h, 4) * config.t * std::sqrt(config.s);
      Check c;
      c.name = "variance_identity_degenerate_small";
      c.anchor = "variance_identity.leading_term_32h4";
      c.h = h;
      c.estimate = std::max(el.mean, er.mean);
      c.oracle = scale;
      c.gate = "both sides <= 32 h^4 t sqrt(s)";
      c.pass = el.mean <= scale && er.mean <= scale;
      report.checks.push_back(c);
    } else {
      const auto r = paired_ratio(lhs, rhs);
      Check c = band_check("variance_identity_ratio",
                           "variance_identity.leading_term_32h4", h, r.ratio,
                           tol.ratio_lo, tol.ratio_hi, false);
      c.estimate_se = r.se;
      report.checks.push_back(c);
      err_by_h.emplace_back(h, std::fabs(r.ratio - 1.0));
      // Diagnostic: leading constant from the Gaussian increment heuristic.
      Check d = band_check("variance_identity_ratio_vs_64h4",
                           "variance_identity.heuristic_constant_64h4", h,
                           0.5 * r.ratio, tol.ratio_lo, tol.ratio_hi, false);
      d.estimate_se = 0.5 * r.se;
      report.checks.push_back(d);
    }
    report.rows.push_back(std::move(row));
  }
  if (!degenerate) {
    std::sort(err_by_h.begin(), err_by_h.end());
    // Gate the band at the smallest lag; report the rest.
    for (auto& c : report.checks) {
      if (c.name == "variance_identity_ratio" && c.h == err_by_h.front().first) {
        c.gating = true;
      }
    }
    if (err_by_h.size() >= 2) {
      Check tc;
      tc.name = "variance_identity_ratio_trend";
      tc.anchor = "variance_identity.remainder_vanishes";
      tc.h = err_by_h.front().first;
      tc.estimate = err_by_h.front().second;
      tc.oracle = err_by_h.back().second;
      tc.gate = "|ratio - 1| at smallest h below that at largest h";
      tc.pass = err_by_h.front().second < err_by_h.back().second;
      report.checks.push_back(tc);
    }
  }
  auto retries = cols.col(2 * H);
  const auto rb = cols.col(2 * H + 1);
  for (std::size_t i = 0; i < retries.size(); ++i) retries[i] += rb[i];
  auto occ = cols.col(2 * H + 2);
  const auto ob = cols.col(2 * H + 3);
  occ.insert(occ.end(), ob.begin(), ob.end());
  finish_common(report, retries, occ);
}

// ------------------------------------------------------ deterministic kinds

Check trend_check(std::string name, std::string anchor,
                  std::vector<std::pair<double, double>> err_by_h) {
  std::sort(err_by_h.begin(), err_by_h.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  bool decreasing = true;
  for (std::size_t i = 1; i < err_by_h.size(); ++i) {
    decreasing = decreasing && err_by_h[i].second < err_by_h[i - 1].second;
  }
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.h = err_by_h.back().first;
  c.estimate = err_by_h.back().second;
  c.oracle = err_by_h.front().second;
  c.gate = "error strictly decreasing as h decreases";
  c.pass = decreasing;
  return c;
}

Check relative_check(std::string name, std::string anchor, double h,
                     double value, double target, double rel) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.h = h;
  c.estimate = value;
  c.oracle = target;
  c.ratio = value / target;
  c.gate = "|value / target - 1| <= " + num(rel);
  c.pass = std::fabs(value / target - 1.0) <= rel;
  return c;
}

void run_lemma21(const ExperimentConfig& config, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  for (double alpha : {0.5, 1.0, 2.0}) {
    Check c;
    c.name = "laplace_identity_alpha=" + num(alpha);
    c.anchor = "potential.laplace_transform_of_heat_kernel";
    c.estimate = laplace_identity_max_error(alpha);
    c.oracle = 0.0;
    c.gate = "max_x |error| <= " + num(tol.laplace_abs);
    c.pass = c.estimate <= tol.laplace_abs;
    report.checks.push_back(c);
  }
  auto hs = config.h_list;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  const double h_min = hs.back();
  const double alpha = config.alpha;
  for (double h : hs) {
    LagRow row;
    row.h = h;
    for (int q : config.q_list) {
      const auto r = integral_w_power(alpha, h, q);
      row.estimates["w_power_q" + std::to_string(q) + "_over_h_q+1"] =
          {r.value / std::pow(h, q + 1), r.abs_error_bound / std::pow(h, q + 1), 1, 0.0};
    }
    const auto restricted = integral_w_power(alpha, h, 2, true);
    row.estimates["w_power_q2_abs_ge_h_over_h3"] = {
        restricted.value / std::pow(h, 3), restricted.abs_error_bound / std::pow(h, 3), 1, 0.0};
    report.rows.push_back(std::move(row));
  }
  for (int q : config.q_list) {
    const double coef = second_difference_coefficient(q);
    std::vector<std::pair<double, double>> errs;
    for (double h : hs) {
      const double ratio = integral_w_power(alpha, h, q).value / std::pow(h, q + 1);
      errs.emplace_back(h, std::fabs(ratio / coef - 1.0));
      if (h == h_min) {
        report.checks.push_back(relative_check(
            "w_power_coefficient_q" + std::to_string(q),
            "potential.second_difference_power_integral", h, ratio, coef,
            tol.coeff_relative));
      }
    }
    report.checks.push_back(trend_check(
        "w_power_coefficient_trend_q" + std::to_string(q),
        "potential.second_difference_power_integral", errs));
  }
  {
    std::vector<std::pair<double, double>> ratios;
    for (double h : hs) {
      ratios.emplace_back(h, integral_w_power(alpha, h, 2, true).value / std::pow(h, 3));
    }
    report.checks.push_back(trend_check(
        "w_power_restricted_q2_over_h3_to_zero",
        "potential.second_difference_power_away_from_origin", ratios));
  }
  const std::vector<double> three{0.5, 1.0, 2.0};
  const std::vector<double> two{0.5, 2.0};
  report.checks.push_back(relative_check(
      "w_power_multi_q3", "potential.second_difference_product_integral", h_min,
      integral_w_power_multi(three, h_min).value / std::pow(h_min, 4),
      second_difference_coefficient(3), tol.coeff_relative));
  report.checks.push_back(relative_check(
      "w_power_multi_q2", "potential.second_difference_product_integral", h_min,
      integral_w_power_multi(two, h_min).value / std::pow(h_min, 3),
      second_difference_coefficient(2), tol.coeff_relative));
  report.checks.push_back(relative_check(
      "u_hh_at_zero_over_h", "potential.second_difference_at_origin_2h", 1e-4,
      u_hh_at_zero(alpha, 1e-4) / 1e-4, 2.0, 1e-3));
}

void run_lemma24(const ExperimentConfig& config, ExperimentReport& report) {
  const auto& tol = config.tolerance;
  auto hs = config.h_list;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  const double h_min = hs.back();
  for (double h : hs) {
    LagRow row;
    row.h = h;
    for (int q : config.q_list) {
      for (auto upper : {TimeUpper::infinity, TimeUpper::h}) {
        const std::string up = upper == TimeUpper::infinity ? "inf" : "h";
        const auto r = integral_heat_diff_power(h, q, upper);
        const double scale = std::pow(h, q + 1);
        const std::string tag = "q" + std::to_string(q) + "_upper_" + up;
        row.estimates["direct_" + tag + "_over_h_q+1"] = {
            r.direct.value / scale, r.direct.abs_error_bound / scale, 1, 0.0};
        row.estimates["fourier_" + tag + "_over_h_q+1"] = {
            r.fourier.value / scale, r.fourier.abs_error_bound / scale, 1, 0.0};
        Check gap;
        gap.name = "heat_power_fourier_vs_direct_" + tag;
        gap.anchor = "heat.second_difference_power_fourier_representation";
        gap.h = h;
        gap.estimate = r.direct.value / scale;
        gap.oracle = r.fourier.value / scale;
        gap.ratio = r.relative_gap();
        gap.gate = "relative gap <= " + num(tol.fourier_relative);
        gap.pass = r.relative_gap() <= tol.fourier_relative;
        report.checks.push_back(gap);
        if (h == h_min) {
          report.checks.push_back(relative_check(
              "heat_power_coefficient_" + tag,
              "heat.second_difference_power_integral", h,
              r.direct.value / scale, second_difference_coefficient(q),
              tol.heat_coeff_relative));
        }
      }
    }
    report.rows.push_back(std::move(row));
  }
}

}  // namespace

Verdict compare_to_oracle(const MomentEstimate& est, double oracle,
                          double oracle_se, const TolerancePolicy& policy) {
  const double se = std::sqrt(est.std_error * est.std_error +
                              oracle_se * oracle_se);
  const double diff = est.mean - oracle;
  if (se == 0.0) {
    return {diff == 0.0 ? 0.0 : std::copysign(
                                    std::numeric_limits<double>::infinity(), diff),
            diff == 0.0};
  }
  const double z = diff / se;
  return {z, std::fabs(z) <= policy.z_gate};
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_rows(
    std::size_t n, std::size_t width, unsigned threads,
    const std::function<void(std::size_t, std::span<double>)>& row,
    std::vector<double>& matrix) {
  matrix.assign(n * width, 0.0);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      row(i, std::span<double>(matrix.data() + i * width, width));
    }
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) {
          row(i, std::span<double>(matrix.data() + i * width, width));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double laplace_identity_max_error(double alpha) {
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double x = -5.0 + 0.1 * i;
    const double got = heat_kernel_laplace(x, alpha).value;
    worst = std::max(worst, std::fabs(got - u_alpha(x, alpha)));
  }
  return worst;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  report.code_version = kCodeVersion;
  report.tolerance_note = kToleranceNote;
  switch (config.kind) {
    case ExperimentKind::clt2: run_clt(config, 2, report); break;
    case ExperimentKind::clt3: run_clt(config, 3, report); break;
    case ExperimentKind::clt4_conjecture: run_clt(config, 4, report); break;
    case ExperimentKind::scaling: run_scaling(config, report); break;
    case ExperimentKind::kac_oracle: run_kac_oracle(config, report); break;
    case ExperimentKind::exp_time_moments: run_exp_time(config, report); break;
    case ExperimentKind::variance_identity:
      run_variance_identity(config, report);
      break;
    case ExperimentKind::lemma21_integrals: run_lemma21(config, report); break;
    case ExperimentKind::lemma24_integrals: run_lemma24(config, report); break;
  }
  report.wall_time = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
  return report;
}

ExperimentReport variance_identity_check(double t, double s,
                                         std::vector<double> h_list,
                                         std::size_t n_pairs,
                                         std::uint64_t base_seed, double dt,
                                         double dx) {
  ExperimentConfig c;
  c.kind = ExperimentKind::variance_identity;
  c.t = t;
  c.s = s;
  c.h_list = std::move(h_list);
  c.n_paths = n_pairs;
  c.base_seed = base_seed;
  c.dt = dt;
  c.dx = dx;
  return run_experiment(c);
}

ExperimentReport scaling_check(double t, double h, int p, std::size_t n_paths,
                               std::uint64_t base_seed, double dt, double dx) {
  ExperimentConfig c;
  c.kind = ExperimentKind::scaling;
  c.t = t;
  c.h_list = {h};
  c.p = p;
  c.n_paths = n_paths;
  c.base_seed = base_seed;
  c.dt = dt;
  c.dx = dx;
  return run_experiment(c);
}

ExperimentReport exponential_time_moment_check(int m, double h, double zeta,
                                               std::size_t n_paths,
                                               std::uint64_t base_seed,
                                               double dt, double dx) {
  if (m != 1 && m != 2) throw ParameterError("moment order m must be 1 or 2");
  ExperimentConfig c;
  c.kind = ExperimentKind::exp_time_moments;
  c.h_list = {h};
  c.zeta = zeta;
  c.n_paths = n_paths;
  c.base_seed = base_seed;
  c.dt = dt;
  c.dx = dx;
  auto report = run_experiment(c);
  // Keep only the requested moment's check alongside the shared ones.
  const std::string drop = m == 1 ? "exp_time_second_moment_ratio"
                                  : "exp_time_first_moment_zero";
  std::erase_if(report.checks, [&](const Check& ch) { return ch.name == drop; });
  return report;
}

}  // namespace loctime
