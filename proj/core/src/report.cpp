#include "loctime/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loctime/errors.hpp"

namespace loctime {
namespace {

using nlohmann::json;

// JSON has no NaN/inf; they travel as null and come back as NaN.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double read_number(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

json to_json(const MomentEstimate& m) {
  return {{"mean", number(m.mean)},
          {"std_error", number(m.std_error)},
          {"n", m.n},
          {"raw_second_moment", number(m.raw_second_moment)}};
}

MomentEstimate estimate_from_json(const json& j) {
  return {read_number(j.at("mean")), read_number(j.at("std_error")),
          j.at("n").get<std::size_t>(),
          read_number(j.at("raw_second_moment"))};
}

json to_json(const Check& c) {
  return {{"name", c.name},         {"anchor", c.anchor},
          {"h", number(c.h)},       {"estimate", number(c.estimate)},
          {"estimate_se", number(c.estimate_se)},
          {"oracle", number(c.oracle)},
          {"oracle_se", number(c.oracle_se)},
          {"z", number(c.z)},       {"ratio", number(c.ratio)},
          {"gate", c.gate},         {"pass", c.pass},
          {"gating", c.gating}};
}

Check check_from_json(const json& j) {
  Check c;
  c.name = j.at("name").get<std::string>();
  c.anchor = j.at("anchor").get<std::string>();
  c.h = read_number(j.at("h"));
  c.estimate = read_number(j.at("estimate"));
  c.estimate_se = read_number(j.at("estimate_se"));
  c.oracle = read_number(j.at("oracle"));
  c.oracle_se = read_number(j.at("oracle_se"));
  c.z = read_number(j.at("z"));
  c.ratio = read_number(j.at("ratio"));
  c.gate = j.at("gate").get<std::string>();
  c.pass = j.at("pass").get<bool>();
  c.gating = j.at("gating").get<bool>();
  return c;
}

json body(const ExperimentReport& r) {
  json config = json::object();
  for (const auto& [k, v] : config_to_table(r.config)) config[k] = v;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json est = json::object();
    for (const auto& [name, m] : row.estimates) est[name] = to_json(m);
    rows.push_back({{"h", number(row.h)}, {"estimates", est}});
  }
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"schema_version", r.schema_version},
          {"kind", to_string(r.config.kind)},
          {"config", config},
          {"rows", rows},
          {"checks", checks},
          {"retries", r.retries},
          {"degraded", r.degraded},
          {"passed", r.passed()},
          {"code_version", r.code_version},
          {"tolerance_note", r.tolerance_note}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

bool ExperimentReport::passed() const {
  if (degraded) return false;
  for (const auto& c : checks) {
    if (c.gating && !c.pass) return false;
  }
  return true;
}

std::string report_to_json(const ExperimentReport& report, int indent) {
  json j = body(report);
  j["wall_time"] = report.wall_time;
  return j.dump(indent);
}

ExperimentReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  ExperimentReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) {
    throw ConfigError("unsupported report schema version " +
                      std::to_string(r.schema_version));
  }
  IniTable table;
  for (const auto& [k, v] : j.at("config").items()) {
    table[k] = v.get<std::string>();
  }
  r.config = config_from_table(table);
  for (const auto& row : j.at("rows")) {
    LagRow lr;
    lr.h = read_number(row.at("h"));
    for (const auto& [name, m] : row.at("estimates").items()) {
      lr.estimates[name] = estimate_from_json(m);
    }
    r.rows.push_back(std::move(lr));
  }
  for (const auto& c : j.at("checks")) r.checks.push_back(check_from_json(c));
  r.retries = j.at("retries").get<std::size_t>();
  r.degraded = j.at("degraded").get<bool>();
  r.wall_time = j.value("wall_time", 0.0);
  r.code_version = j.at("code_version").get<std::string>();
  r.tolerance_note = j.at("tolerance_note").get<std::string>();
  return r;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  const std::string kind = to_string(report.config.kind);
  for (const auto& c : report.checks) {
    out += std::to_string(report.schema_version) + "," + kind + "," +
           csv_number(c.h) + "," + csv_field(c.name) + "," +
           csv_field(c.anchor) + "," + csv_number(c.estimate) + "," +
           csv_number(c.estimate_se) + "," + csv_number(c.oracle) + "," +
           csv_number(c.oracle_se) + "," + csv_number(c.z) + "," +
           csv_number(c.ratio) + "," + (c.gating ? "1" : "0") + "," +
           (c.pass ? "1" : "0") + "\n";
  }
  return out;
}

bool reports_equivalent(const ExperimentReport& a, const ExperimentReport& b) {
  return body(a) == body(b);
}

bool aggregates_equal(const ExperimentReport& a, const ExperimentReport& b) {
  const json ja = body(a);
  const json jb = body(b);
  return ja.at("rows") == jb.at("rows") && ja.at("checks") == jb.at("checks") &&
         ja.at("retries") == jb.at("retries");
}

}  // namespace loctime
