#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wgqst/experiments.hpp"

namespace wgqst {

namespace {

using nlohmann::json;

const std::map<std::string, std::string>& catalogue() {
  static const std::map<std::string, std::string> c = {
      {"fig1c", "required dispersion relations k(omega): linear band and far-field design per d"},
      {"fig1d", "population dynamics under the far-field design and the linear band"},
      {"fig2a", "maximum transfer vs d: far-field, near-field and optimized dispersions"},
      {"fig2b", "biexponential rates and weights vs d"},
      {"fig2cd", "gradient optimization of the dispersion at one d: table, history, dynamics"},
      {"fig3a", "transfer vs separation error: ramp design against the homogeneous design"},
      {"fig3c", "ramp reflection vs half-length at three frequencies, with the bound"},
      {"custom", "dynamics for a chosen dispersion (far, near, linear, corrected or table)"},
  };
  return c;
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object", where);
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (!allowed.count(k)) {
      const std::string key = where.empty() ? k : where + "." + k;
      throw ConfigError("unknown key '" + key + "'", key);
    }
  }
}

double number(const json& obj, const std::string& name, const std::string& key, double fallback) {
  if (!obj.contains(name)) return fallback;
  const json& v = obj.at(name);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number", key);
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite", key);
  return x;
}

double positive(const json& obj, const std::string& name, const std::string& key, double fallback) {
  const double x = number(obj, name, key, fallback);
  if (!(x > 0.0)) throw ConfigError("'" + key + "' must be positive", key);
  return x;
}

int integer(const json& obj, const std::string& name, const std::string& key, int fallback, int min) {
  if (!obj.contains(name)) return fallback;
  const json& v = obj.at(name);
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer", key);
  const auto x = v.get<long long>();
  if (x < min || x > 10'000'000) throw ConfigError("'" + key + "' is out of range", key);
  return static_cast<int>(x);
}

std::vector<double> parse_sweep(const json& s) {
  std::vector<double> out;
  if (s.is_array()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string key = "sweep[" + std::to_string(i) + "]";
      if (!s[i].is_number()) throw ConfigError("'" + key + "' must be a number", key);
      out.push_back(s[i].get<double>());
    }
  } else {
    check_keys(s, "sweep", {"from", "to", "count", "spacing"});
    for (const char* k : {"from", "to", "count"})
      if (!s.contains(k)) throw ConfigError(std::string("missing key 'sweep.") + k + "'", std::string("sweep.") + k);
    const double a = number(s, "from", "sweep.from", 0.0), b = number(s, "to", "sweep.to", 0.0);
    const int n = integer(s, "count", "sweep.count", 0, 1);
    std::string spacing = "linear";
    if (s.contains("spacing")) {
      if (!s["spacing"].is_string()) throw ConfigError("'sweep.spacing' must be a string", "sweep.spacing");
      spacing = s["spacing"].get<std::string>();
    }
    if (spacing != "linear" && spacing != "log")
      throw ConfigError("'sweep.spacing' must be 'linear' or 'log'", "sweep.spacing");
    if (spacing == "log" && !(a > 0.0 && b > 0.0))
      throw ConfigError("log sweep needs positive end points", "sweep.from");
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(spacing == "log" ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
  }
  if (out.empty()) throw ConfigError("'sweep' is empty", "sweep");
  return out;
}

std::vector<double> log_space(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return v;
}

// Experiment-specific defaults applied before overrides.
void defaults_for(ExperimentSpec& s) {
  double d = 5.0;
  if (s.name == "fig2cd") d = 2.0;
  if (s.name == "fig3a" || s.name == "fig3c") d = 15.0;
  s.params = PhysicalParams::standard(d);
  if (s.name == "fig1c") s.sweep = {1.0, 2.0, 5.0, 10.0};
  if (s.name == "fig2a") {
    s.sweep = log_space(0.1, 15.0, 24);
    s.optimizer.max_iters = 10;
  }
  if (s.name == "fig2b") s.sweep = log_space(0.05, 50.0, 61);
  if (s.name == "fig3a") s.sweep = {-0.5, -0.25, 0.0, 0.25, 0.5};
  if (s.name == "fig3c") s.sweep = log_space(0.5, 20.0, 80);
}

bool takes_sweep(const std::string& name) {
  return name == "fig1c" || name == "fig2a" || name == "fig2b" || name == "fig3a" || name == "fig3c";
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fig1c", "fig1d", "fig2a", "fig2b",
                                                 "fig2cd", "fig3a", "fig3c", "custom"};
  return names;
}

std::string experiment_summary(const std::string& name) {
  const auto it = catalogue().find(name);
  if (it == catalogue().end()) throw UsageError("unknown experiment '" + name + "'");
  return it->second;
}

ExperimentSpec parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"experiment", "output", "params", "grid", "sweep", "optimizer", "ramp", "dispersion", "seed"});
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("'experiment' must name an experiment", "experiment");

  ExperimentSpec s;
  s.name = j["experiment"].get<std::string>();
  if (!catalogue().count(s.name)) throw UsageError("unknown experiment '" + s.name + "'");
  defaults_for(s);

  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("'output' must be a path", "output");
    s.output = j["output"].get<std::string>();
  }
  if (j.contains("seed")) s.seed = static_cast<unsigned>(integer(j, "seed", "seed", 0, 0));

  if (j.contains("params")) {
    const json& p = j["params"];
    check_keys(p, "params", {"gamma", "v_g", "omega_q", "d"});
    const double gamma = positive(p, "gamma", "params.gamma", s.params.gamma());
    const double v = positive(p, "v_g", "params.v_g", s.params.v_g());
    const double wq = positive(p, "omega_q", "params.omega_q", s.params.omega_q());
    const double d = positive(p, "d", "params.d", s.params.d());
    s.params = PhysicalParams(wq, gamma, v, d);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"modes", "window", "resolution"});
    s.grid.modes = integer(g, "modes", "grid.modes", s.grid.modes, 2);
    s.grid.window = positive(g, "window", "grid.window", s.grid.window);
    s.grid.resolution = positive(g, "resolution", "grid.resolution", s.grid.resolution);
  }
  if (j.contains("sweep")) {
    if (!takes_sweep(s.name)) throw ConfigError("experiment '" + s.name + "' takes no sweep", "sweep");
    s.sweep = parse_sweep(j["sweep"]);
  }
  if (s.name != "fig3a")
    for (double x : s.sweep)
      if (!(x > 0.0)) throw ConfigError("sweep values must be positive for '" + s.name + "'", "sweep");
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    check_keys(o, "optimizer", {"max_iters", "tolerance", "smoothing", "initial_step"});
    s.optimizer.max_iters = integer(o, "max_iters", "optimizer.max_iters", s.optimizer.max_iters, 0);
    s.optimizer.tolerance = number(o, "tolerance", "optimizer.tolerance", s.optimizer.tolerance);
    s.optimizer.smoothing = number(o, "smoothing", "optimizer.smoothing", s.optimizer.smoothing);
    s.optimizer.initial_step = positive(o, "initial_step", "optimizer.initial_step", s.optimizer.initial_step);
    if (s.optimizer.tolerance < 0.0) throw ConfigError("'optimizer.tolerance' must be non-negative", "optimizer.tolerance");
    if (s.optimizer.smoothing < 0.0) throw ConfigError("'optimizer.smoothing' must be non-negative", "optimizer.smoothing");
  }
  if (j.contains("ramp")) {
    const json& r = j["ramp"];
    check_keys(r, "ramp", {"half_length", "homogeneous_window", "gap"});
    s.ramp.half_length = positive(r, "half_length", "ramp.half_length", s.ramp.half_length);
    s.ramp.homogeneous_window = positive(r, "homogeneous_window", "ramp.homogeneous_window", s.ramp.homogeneous_window);
    s.ramp.gap = positive(r, "gap", "ramp.gap", s.ramp.gap);
  }
  if (j.contains("dispersion")) {
    const json& dj = j["dispersion"];
    check_keys(dj, "dispersion", {"kind", "delta_t", "table"});
    if (dj.contains("kind")) {
      if (!dj["kind"].is_string()) throw ConfigError("'dispersion.kind' must be a string", "dispersion.kind");
      s.dispersion.kind = dj["kind"].get<std::string>();
    }
    static const std::set<std::string> kinds = {"far", "near", "linear", "corrected", "table"};
    if (!kinds.count(s.dispersion.kind))
      throw ConfigError("'dispersion.kind' must be one of far, near, linear, corrected, table", "dispersion.kind");
    if (dj.contains("delta_t")) s.dispersion.delta_t = positive(dj, "delta_t", "dispersion.delta_t", 1.0);
    if (dj.contains("table")) {
      if (!dj["table"].is_string()) throw ConfigError("'dispersion.table' must be a path", "dispersion.table");
      s.dispersion.table = dj["table"].get<std::string>();
    }
    if (s.dispersion.kind == "table" && s.dispersion.table.empty())
      throw ConfigError("'dispersion.table' is required for kind 'table'", "dispersion.table");
  }
  return s;
}

ExperimentSpec parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string spec_to_json(const ExperimentSpec& s) {
  json j;
  j["experiment"] = s.name;
  j["params"] = {{"gamma", s.params.gamma()}, {"v_g", s.params.v_g()}, {"omega_q", s.params.omega_q()},
                 {"d", s.params.d()}};
  j["grid"] = {{"modes", s.grid.modes}, {"window", s.grid.window}, {"resolution", s.grid.resolution}};
  if (!s.sweep.empty()) j["sweep"] = s.sweep;
  j["optimizer"] = {{"max_iters", s.optimizer.max_iters}, {"tolerance", s.optimizer.tolerance},
                    {"smoothing", s.optimizer.smoothing}, {"initial_step", s.optimizer.initial_step}};
  j["ramp"] = {{"half_length", s.ramp.half_length}, {"homogeneous_window", s.ramp.homogeneous_window},
               {"gap", s.ramp.gap}};
  j["dispersion"] = {{"kind", s.dispersion.kind}};
  if (s.dispersion.delta_t) j["dispersion"]["delta_t"] = *s.dispersion.delta_t;
  if (!s.dispersion.table.empty()) j["dispersion"]["table"] = s.dispersion.table;
  j["seed"] = s.seed;
  return j.dump();
}

}  // namespace wgqst
