#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wgqst/experiments.hpp"

using namespace wgqst;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wgqst_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string key_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("every experiment has a description") {
  CHECK(experiment_names().size() == 8);
  for (const auto& n : experiment_names()) CHECK(!experiment_summary(n).empty());
}

TEST_CASE("config defaults and round trip") {
  const auto s = parse_config_text(R"({"experiment": "fig2cd"})");
  CHECK(s.params.d() == 2.0);
  CHECK(s.grid.modes == 2000);
  const auto again = parse_config_text(spec_to_json(s));
  CHECK(spec_to_json(again) == spec_to_json(s));

  const auto f = parse_config_text(R"({"experiment": "fig2b", "sweep": {"from": 1, "to": 100, "count": 3, "spacing": "log"}})");
  REQUIRE(f.sweep.size() == 3);
  CHECK(f.sweep[1] == doctest::Approx(10.0));
}

TEST_CASE("config errors name the key") {
  CHECK(key_of(R"({"experiment": "fig1d", "grid": {"modez": 3}})") == "grid.modez");
  CHECK(key_of(R"({"experiment": "fig1d", "params": {"d": -1}})") == "params.d");
  CHECK(key_of(R"({"experiment": "fig1d", "grid": {"modes": 2.5}})") == "grid.modes");
  CHECK(key_of(R"({"experiment": "fig1d", "sweep": [1, 2]})") == "sweep");
  CHECK(key_of(R"({"experiment": "custom", "dispersion": {"kind": "table"}})") == "dispersion.table");
  CHECK(key_of(R"({"experiment": "custom", "dispersion": {"kind": "wiggly"}})") == "dispersion.kind");
  CHECK(key_of(R"({"grid": {}})") == "experiment");
  CHECK_THROWS_AS(parse_config_text(R"({"experiment": "fig9"})"), UsageError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/config.json")), ConfigError);
}

TEST_CASE("outputs are deterministic and carry metadata") {
  auto spec = parse_config_text(
      R"({"experiment": "fig3c", "sweep": {"from": 1, "to": 12, "count": 7, "spacing": "log"}})");
  spec.output = scratch("a");
  const auto a = run_experiment(spec, {1});
  spec.output = scratch("b");
  const auto b = run_experiment(spec, {3});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].filename() == b[i].filename());
    CHECK(slurp(a[i]) == slurp(b[i]));
  }
  const std::string text = slurp(a[0]);
  CHECK(text.rfind("# wgqst ", 0) == 0);
  CHECK(text.find("# config={") != std::string::npos);
  CHECK(text.find("units:") != std::string::npos);
}

TEST_CASE("json summaries embed the config") {
  auto spec = parse_config_text(R"({"experiment": "custom", "params": {"d": 3}, "grid": {"modes": 400}})");
  spec.output = scratch("c");
  const auto files = run_experiment(spec);
  REQUIRE(files.size() == 2);
  const auto j = nlohmann::json::parse(slurp(files[1]));
  CHECK(j["metadata"]["config"]["params"]["d"] == 3.0);
  CHECK(j["metadata"]["version"] == std::string(version()));
  CHECK(j["transfer"]["norm_error"].get<double>() < 1e-10);
  CHECK(j["transfer"]["p_star"].get<double>() > 0.9);
}
