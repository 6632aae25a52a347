#include "loctime/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "loctime/errors.hpp"

namespace loctime {
namespace {

constexpr double kMaxHorizon = 10.0;

const std::map<std::string, std::string>& canonical_sections() {
  static const std::map<std::string, std::string> sections = {
      {"kind", "experiment"},
      {"t", "experiment"},
      {"s", "experiment"},
      {"h_list", "experiment"},
      {"dt", "experiment"},
      {"n_paths", "experiment"},
      {"base_seed", "experiment"},
      {"zeta", "experiment"},
      {"p", "experiment"},
      {"start", "experiment"},
      {"alpha", "experiment"},
      {"q_list", "experiment"},
      {"threads", "experiment"},
      {"allow_coarse_dt", "experiment"},
      {"fourth_split_centering", "experiment"},
      {"dx", "grid"},
      {"half_width", "grid"},
      {"specs", "kac"},
      {"h", "kac"},
      {"z_gate", "tolerance"},
      {"clt_relative", "tolerance"},
      {"ratio_lo", "tolerance"},
      {"ratio_hi", "tolerance"},
      {"moment_ratio_lo", "tolerance"},
      {"moment_ratio_hi", "tolerance"},
      {"coeff_relative", "tolerance"},
      {"heat_coeff_relative", "tolerance"},
      {"fourier_relative", "tolerance"},
      {"laplace_abs", "tolerance"},
      {"occupation_relative", "tolerance"},
      {"exact_relative", "tolerance"},
      {"degraded_retry_fraction", "tolerance"},
  };
  return sections;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + v +
                      "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto u = std::stoull(v, &used, 0);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an unsigned integer, got '" +
                      v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("field '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

bool on_lattice(double x, double dx) {
  const double k = std::round(x / dx);
  return std::fabs(k * dx - x) <= 1e-9 * dx;
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigError("field '" + field + "': " + why);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::clt2: return "clt2";
    case ExperimentKind::clt3: return "clt3";
    case ExperimentKind::clt4_conjecture: return "clt4_conjecture";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::kac_oracle: return "kac_oracle";
    case ExperimentKind::exp_time_moments: return "exp_time_moments";
    case ExperimentKind::variance_identity: return "variance_identity";
    case ExperimentKind::lemma21_integrals: return "lemma21_integrals";
    case ExperimentKind::lemma24_integrals: return "lemma24_integrals";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::clt2, ExperimentKind::clt3,
                 ExperimentKind::clt4_conjecture, ExperimentKind::scaling,
                 ExperimentKind::kac_oracle, ExperimentKind::exp_time_moments,
                 ExperimentKind::variance_identity,
                 ExperimentKind::lemma21_integrals,
                 ExperimentKind::lemma24_integrals}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("field 'kind': unknown experiment kind '" + name + "'");
}

bool is_monte_carlo(ExperimentKind kind) {
  return kind != ExperimentKind::lemma21_integrals &&
         kind != ExperimentKind::lemma24_integrals;
}

double ExperimentConfig::t_max() const {
  switch (kind) {
    case ExperimentKind::variance_identity:
      return std::max(t, s);
    case ExperimentKind::kac_oracle:
    case ExperimentKind::exp_time_moments:
      return zeta ? 1.0 / *zeta : 1.0;
    default:
      return t;
  }
}

GridSpec ExperimentConfig::grid_for(double horizon) const {
  const double hw = half_width > 0.0 ? half_width : 6.0 * std::sqrt(horizon);
  return GridSpec::centered(hw, dx);
}

void ExperimentConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  const auto& tol = tolerance;
  require(finite(tol.z_gate) && tol.z_gate > 0, "z_gate", "must be > 0");
  require(tol.ratio_lo < tol.ratio_hi, "ratio_lo", "must be below ratio_hi");
  require(tol.moment_ratio_lo < tol.moment_ratio_hi, "moment_ratio_lo",
          "must be below moment_ratio_hi");
  if (!is_monte_carlo(kind)) {
    require(!h_list.empty(), "h_list", "must be nonempty");
    for (double h : h_list) {
      require(finite(h) && h > 0.0 && h <= 1.0, "h_list",
              "each h must lie in (0, 1]");
    }
    require(finite(alpha) && alpha > 0.0, "alpha", "must be > 0");
    require(!q_list.empty(), "q_list", "must be nonempty");
    for (int q : q_list) require(q >= 2, "q_list", "each q must be >= 2");
    return;
  }
  require(n_paths >= 100, "n_paths", "must be >= 100");
  require(finite(t) && t > 0.0 && t <= kMaxHorizon, "t",
          "must lie in (0, 10]");
  require(finite(dt) && dt > 0.0, "dt", "must be > 0");
  require(finite(dx) && dx > 0.0, "dx", "must be > 0");
  require(finite(half_width) && half_width >= 0.0, "half_width",
          "must be >= 0");
  require(finite(start), "start", "must be finite");

  const bool needs_zeta = kind == ExperimentKind::kac_oracle ||
                          kind == ExperimentKind::exp_time_moments;
  if (needs_zeta) {
    require(zeta.has_value() && finite(*zeta) && *zeta > 0.0, "zeta",
            "required and > 0 for exponential-time experiments");
  } else {
    require(dt <= t, "dt", "must not exceed t");
  }
  if (kind == ExperimentKind::variance_identity) {
    require(finite(s) && s > 0.0 && s <= kMaxHorizon, "s",
            "must lie in (0, 10]");
  }
  if (kind == ExperimentKind::scaling) {
    require(p >= 1, "p", "must be >= 1");
  }
  if (kind == ExperimentKind::kac_oracle) {
    require(!kac_specs.empty(), "specs", "kac_oracle needs at least one spec");
    for (const auto& spec : kac_specs) {
      try {
        spec.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("field 'specs': ") + e.what());
      }
      for (double x : spec.points) {
        require(on_lattice(x, dx) && on_lattice(x + spec.h, dx), "specs",
                "points and shifts must be integer multiples of dx");
      }
    }
    return;
  }

  require(!h_list.empty(), "h_list", "must be nonempty");
  for (double h : h_list) {
    require(finite(h) && h > 0.0, "h_list", "each h must be > 0");
    require(on_lattice(h, dx), "h_list",
            "each h must be an integer multiple of dx");
    if (!allow_coarse_dt) {
      require(std::sqrt(dt) <= h / 5.0 * (1.0 + 1e-12), "h_list",
              "needs sqrt(dt) <= h/5 (set allow_coarse_dt = true to override)");
    }
  }
}

IniTable parse_ini(std::istream& in) {
  IniTable table;
  std::string section = "experiment";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const auto it = canonical_sections().find(key);
    if (it == canonical_sections().end() || it->second != section) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown field '" +
                        section + "." + key + "'");
    }
    table[section + "." + key] = trim(line.substr(eq + 1));
  }
  return table;
}

IniTable parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_ini(in);
}

void apply_overrides(IniTable& table,
                     const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + ov + "': expected key=value");
    }
    std::string key = trim(ov.substr(0, eq));
    const std::string value = trim(ov.substr(eq + 1));
    std::string bare = key;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      bare = key.substr(dot + 1);
    }
    const auto it = canonical_sections().find(bare);
    if (it == canonical_sections().end()) {
      throw ConfigError("override '" + ov + "': unknown field '" + key + "'");
    }
    const std::string full = it->second + "." + bare;
    if (key != bare && key != full) {
      throw ConfigError("override '" + ov + "': field belongs to section '" +
                        it->second + "'");
    }
    table[full] = value;
  }
}

ExperimentConfig config_from_table(const IniTable& table) {
  ExperimentConfig c;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = table.find(key);
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
  const auto kind = get("experiment.kind");
  if (!kind) throw ConfigError("field 'kind' is missing");
  c.kind = parse_kind(*kind);
  if (auto v = get("experiment.t")) c.t = to_double("t", *v);
  if (auto v = get("experiment.s")) c.s = to_double("s", *v);
  if (auto v = get("experiment.h_list")) c.h_list = to_doubles("h_list", *v);
  if (auto v = get("experiment.dt")) c.dt = to_double("dt", *v);
  if (auto v = get("experiment.n_paths")) {
    const auto n = to_integer("n_paths", *v);
    require(n >= 0, "n_paths", "must be non-negative");
    c.n_paths = static_cast<std::size_t>(n);
  }
  if (auto v = get("experiment.base_seed")) c.base_seed = to_u64("base_seed", *v);
  if (auto v = get("experiment.zeta")) c.zeta = to_double("zeta", *v);
  if (auto v = get("experiment.p")) c.p = static_cast<int>(to_integer("p", *v));
  if (auto v = get("experiment.start")) c.start = to_double("start", *v);
  if (auto v = get("experiment.alpha")) c.alpha = to_double("alpha", *v);
  if (auto v = get("experiment.q_list")) {
    c.q_list.clear();
    for (double q : to_doubles("q_list", *v)) c.q_list.push_back(static_cast<int>(q));
  }
  if (auto v = get("experiment.threads")) {
    const auto n = to_integer("threads", *v);
    require(n >= 0, "threads", "must be >= 0");
    c.threads = static_cast<unsigned>(n);
  }
  if (auto v = get("experiment.allow_coarse_dt")) {
    c.allow_coarse_dt = to_bool("allow_coarse_dt", *v);
  }
  if (auto v = get("experiment.fourth_split_centering")) {
    c.fourth_split_centering = to_bool("fourth_split_centering", *v);
  }
  if (auto v = get("grid.dx")) c.dx = to_double("dx", *v);
  if (auto v = get("grid.half_width")) c.half_width = to_double("half_width", *v);

  auto& tol = c.tolerance;
  const std::vector<std::pair<const char*, double*>> tol_fields = {
      {"z_gate", &tol.z_gate},
      {"clt_relative", &tol.clt_relative},
      {"ratio_lo", &tol.ratio_lo},
      {"ratio_hi", &tol.ratio_hi},
      {"moment_ratio_lo", &tol.moment_ratio_lo},
      {"moment_ratio_hi", &tol.moment_ratio_hi},
      {"coeff_relative", &tol.coeff_relative},
      {"heat_coeff_relative", &tol.heat_coeff_relative},
      {"fourier_relative", &tol.fourier_relative},
      {"laplace_abs", &tol.laplace_abs},
      {"occupation_relative", &tol.occupation_relative},
      {"exact_relative", &tol.exact_relative},
      {"degraded_retry_fraction", &tol.degraded_retry_fraction},
  };
  for (const auto& [name, dst] : tol_fields) {
    if (auto v = get(std::string("tolerance.") + name)) *dst = to_double(name, *v);
  }

  double kac_h = 0.0;
  if (auto v = get("kac.h")) kac_h = to_double("h", *v);
  if (auto v = get("kac.specs")) {
    c.kac_specs = parse_kac_specs(*v, c.zeta.value_or(1.0), c.start, kac_h);
  }
  c.validate();
  return c;
}

IniTable config_to_table(const ExperimentConfig& c) {
  IniTable t;
  t["experiment.kind"] = to_string(c.kind);
  t["experiment.t"] = fmt(c.t);
  t["experiment.s"] = fmt(c.s);
  t["experiment.h_list"] = join(c.h_list);
  t["experiment.dt"] = fmt(c.dt);
  t["experiment.n_paths"] = std::to_string(c.n_paths);
  t["experiment.base_seed"] = std::to_string(c.base_seed);
  if (c.zeta) t["experiment.zeta"] = fmt(*c.zeta);
  t["experiment.p"] = std::to_string(c.p);
  t["experiment.start"] = fmt(c.start);
  t["experiment.alpha"] = fmt(c.alpha);
  t["experiment.q_list"] = join(c.q_list);
  t["experiment.threads"] = std::to_string(c.threads);
  t["experiment.allow_coarse_dt"] = c.allow_coarse_dt ? "true" : "false";
  t["experiment.fourth_split_centering"] =
      c.fourth_split_centering ? "true" : "false";
  t["grid.dx"] = fmt(c.dx);
  t["grid.half_width"] = fmt(c.half_width);
  if (!c.kac_specs.empty()) {
    t["kac.specs"] = format_kac_specs(c.kac_specs);
    double kac_h = 0.0;
    for (const auto& spec : c.kac_specs) kac_h = std::max(kac_h, spec.h);
    t["kac.h"] = fmt(kac_h);
  }
  const auto& tol = c.tolerance;
  t["tolerance.z_gate"] = fmt(tol.z_gate);
  t["tolerance.clt_relative"] = fmt(tol.clt_relative);
  t["tolerance.ratio_lo"] = fmt(tol.ratio_lo);
  t["tolerance.ratio_hi"] = fmt(tol.ratio_hi);
  t["tolerance.moment_ratio_lo"] = fmt(tol.moment_ratio_lo);
  t["tolerance.moment_ratio_hi"] = fmt(tol.moment_ratio_hi);
  t["tolerance.coeff_relative"] = fmt(tol.coeff_relative);
  t["tolerance.heat_coeff_relative"] = fmt(tol.heat_coeff_relative);
  t["tolerance.fourier_relative"] = fmt(tol.fourier_relative);
  t["tolerance.laplace_abs"] = fmt(tol.laplace_abs);
  t["tolerance.occupation_relative"] = fmt(tol.occupation_relative);
  t["tolerance.exact_relative"] = fmt(tol.exact_relative);
  t["tolerance.degraded_retry_fraction"] = fmt(tol.degraded_retry_fraction);
  return t;
}

std::string render_ini(const IniTable& table) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by;
  for (const auto& [full, value] : table) {
    const auto dot = full.find('.');
    by[full.substr(0, dot)].emplace_back(full.substr(dot + 1), value);
  }
  std::string out;
  for (const char* section : {"experiment", "grid", "kac", "tolerance"}) {
    const auto it = by.find(section);
    if (it == by.end()) continue;
    out += std::string("[") + section + "]\n";
    for (const auto& [k, v] : it->second) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

std::vector<PermutationSumSpec> parse_kac_specs(const std::string& text,
                                                double alpha, double start,
                                                double h) {
  std::vector<PermutationSumSpec> out;
  for (const auto& entry : split(text, '|')) {
    if (entry.empty()) continue;
    PermutationSumSpec spec;
    spec.alpha = alpha;
    spec.start = start;
    const auto colon = entry.find(':');
    spec.points = to_doubles("specs", entry.substr(0, colon));
    if (colon != std::string::npos) {
      for (double f : to_doubles("specs", entry.substr(colon + 1))) {
        if (f != 0.0 && f != 1.0 && f != 2.0) {
          throw ConfigError("field 'specs': difference flag must be 0, 1 or 2 in '" + entry + "'");
        }
        spec.diff_flags.push_back(static_cast<int>(f));
      }
      if (spec.diff_flags.size() != spec.points.size()) {
        throw ConfigError("field 'specs': one difference flag per point required in '" + entry + "'");
      }
      spec.h = h;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::string format_kac_specs(const std::vector<PermutationSumSpec>& specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) out += " | ";
    out += join(specs[i].points);
    if (!specs[i].diff_flags.empty()) out += ":" + join(specs[i].diff_flags);
  }
  return out;
}

}  // namespace loctime
