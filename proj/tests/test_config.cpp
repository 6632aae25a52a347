#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "loctime/acceptance.hpp"
#include "loctime/config.hpp"
#include "loctime/errors.hpp"

using namespace loctime;

namespace {

IniTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

ExperimentConfig parse_config(const std::string& text) {
  return config_from_table(parse(text));
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("INI parsing with sections and comments") {
  const auto t = parse("# comment\n[experiment]\nkind = clt3 ; trailing\nt=2\n\n[grid]\ndx = 0.002\n");
  CHECK(t.at("experiment.kind") == "clt3");
  CHECK(t.at("experiment.t") == "2");
  CHECK(t.at("grid.dx") == "0.002");
  CHECK_THROWS_AS(parse("[experiment]\nnot a pair\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nbogus = 1\n"), ConfigError);
}

TEST_CASE("missing and malformed fields name the field") {
  CHECK(error_of("[experiment]\nt = 1\n").find("'kind'") != std::string::npos);
  CHECK(error_of("[experiment]\nkind = clt3\nt = abc\n").find("'t'") != std::string::npos);
  CHECK(error_of("[experiment]\nkind = nope\n").find("'kind'") != std::string::npos);
  CHECK(error_of("[experiment]\nkind = clt3\nn_paths = 50\n").find("'n_paths'") != std::string::npos);
}

TEST_CASE("validation rules") {
  const std::string head = "[experiment]\nkind = clt2\n";
  CHECK(error_of(head + "h_list = 0.0205\n").find("h_list") != std::string::npos);
  CHECK(error_of(head + "dt = 1e-3\n").find("dt") != std::string::npos);
  CHECK(error_of(head + "dt = 1e-3\nallow_coarse_dt = true\n").empty());
  CHECK(error_of(head + "t = 11\n").find("'t'") != std::string::npos);
  CHECK(error_of(head + "h_list =\n").find("h_list") != std::string::npos);
  CHECK(error_of("[experiment]\nkind = exp_time_moments\n").find("zeta") != std::string::npos);
  CHECK(error_of("[experiment]\nkind = kac_oracle\nzeta = 1\nh_list = 0.5\ndt = 1e-4\n[grid]\ndx = 0.005\n[kac]\nspecs = 0.0012\n")
            .find("specs") != std::string::npos);
}

TEST_CASE("overrides accept bare and qualified keys") {
  auto t = parse("[experiment]\nkind = clt3\n[grid]\ndx = 0.001\n");
  apply_overrides(t, {"n_paths=200", "grid.dx=0.002", "z_gate=4"});
  const auto c = config_from_table(t);
  CHECK(c.n_paths == 200);
  CHECK(c.dx == 0.002);
  CHECK(c.tolerance.z_gate == 4.0);
  CHECK_THROWS_AS(apply_overrides(t, {"nonsense=1"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(t, {"n_paths"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(t, {"grid.n_paths=1"}), ConfigError);
}

TEST_CASE("config text round trips") {
  for (const auto& nc : acceptance_configs(false)) {
    const auto table = config_to_table(nc.config);
    const auto text = render_ini(table);
    std::istringstream in(text);
    const auto back = config_from_table(parse_ini(in));
    CHECK(config_to_table(back) == table);
  }
}

TEST_CASE("Kac spec strings") {
  const auto specs = parse_kac_specs("0 | 0.5,-0.25 | 0,0:1,2", 1.0, 0.0, 0.1);
  REQUIRE(specs.size() == 3);
  CHECK(specs[1].points == std::vector<double>{0.5, -0.25});
  CHECK(specs[2].diff_flags == std::vector<int>{1, 2});
  CHECK(specs[2].h == 0.1);
  CHECK(specs[0].h == 0.0);
  CHECK(format_kac_specs(specs) == "0 | 0.5,-0.25 | 0,0:1,2");
  CHECK_THROWS_AS(parse_kac_specs("0,1:1", 1.0, 0.0, 0.1), ConfigError);
  CHECK_THROWS_AS(parse_kac_specs("0:3", 1.0, 0.0, 0.1), ConfigError);
}

TEST_CASE("golden configs match the acceptance definitions") {
  const std::filesystem::path dir = LOCTIME_SOURCE_DIR "/configs";
  for (const auto& nc : acceptance_configs(false)) {
    if (nc.name == "determinism") continue;
    INFO(nc.name);
    const auto file = dir / (nc.name + ".cfg");
    REQUIRE(std::filesystem::exists(file));
    CHECK(config_to_table(config_from_table(parse_ini_file(file.string()))) ==
          config_to_table(nc.config));
  }
  const auto exp = config_from_table(parse_ini_file((dir / "exp_time.cfg").string()));
  CHECK(exp.kind == ExperimentKind::exp_time_moments);
  CHECK(exp.zeta.value() == 1.0);
}

TEST_CASE("quick mode changes values only") {
  const auto full = acceptance_configs(false);
  const auto quick = acceptance_configs(true);
  REQUIRE(full.size() == quick.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].name == quick[i].name);
    CHECK(full[i].config.kind == quick[i].config.kind);
    CHECK(quick[i].config.n_paths <= full[i].config.n_paths);
  }
}
