/**
 * @file config.hpp
 * @brief Run configuration: strict JSON schema (unknown keys are errors),
 *        typed command blocks, and the built-in figure presets.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscope/types.hpp"

namespace tscope {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

namespace cfg {

inline void require_keys(const Json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

inline double num(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

inline double num_or(const Json& obj, const std::string& where, const std::string& key,
                     double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

inline std::size_t uint_or(const Json& obj, const std::string& where, const std::string& key,
                           std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer())
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  const auto v = obj[key].get<long long>();
  if (v < 0) throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline std::uint64_t u64_or(const Json& obj, const std::string& where, const std::string& key,
                            std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (obj[key].is_number_unsigned()) return obj[key].get<std::uint64_t>();
  if (obj[key].is_number_integer() && obj[key].get<long long>() >= 0)
    return static_cast<std::uint64_t>(obj[key].get<long long>());
  throw ConfigError(where + "." + key + ": expected a nonnegative integer");
}

inline std::string str_or(const Json& obj, const std::string& where, const std::string& key,
                          const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return obj[key].get<std::string>();
}

inline bool bool_or(const Json& obj, const std::string& where, const std::string& key,
                    bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return obj[key].get<bool>();
}

inline State vec(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  State out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline State vec(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return vec(obj[key], where + "." + key);
}

inline Box box(const Json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const Json& j = obj[key];
  if (!j.is_array()) throw ConfigError(where + "." + key + ": expected [[lo,hi],...]");
  Box b;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw ConfigError(where + "." + key + ": expected [[lo,hi],...]");
    b.lo.push_back(pair[0].get<double>());
    b.hi.push_back(pair[1].get<double>());
  }
  return b;
}

}  // namespace cfg

struct SimulateSpec {
  std::vector<State> initials;  // one or more starting states
  std::size_t steps = 100;
  bool svg = true;
  std::optional<double> threshold;  // draws the dashed s line and time marker
};

struct TransientTimeSpec {
  State x0;
  double s = 0.0;
  std::size_t horizon = 100000;
  std::optional<std::size_t> transient_T;  // when set, also classify the point
};

struct ClassifySpec {
  std::optional<Box> region;                // default: the zoo entry's region
  std::optional<std::vector<std::size_t>> grid;
  double tol = 1e-9;
  bool empirical = true;
  std::vector<double> radii = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::size_t horizon = 100000;
  std::size_t samples = 256;
};

struct SearchSpec {
  std::string mode;  // escape | transient-points | honeymoon
  // escape
  State candidate;
  std::vector<double> radii = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::size_t horizon = 100000;
  std::size_t samples = 256;
  // transient-points
  std::optional<Box> region;
  double s = 0.0;
  std::size_t transient_T = 0;
  std::size_t budget = 1024;
  // honeymoon
  State direction;
  std::vector<double> epsilons;
};

struct PortraitSpec {
  Box region;
  std::array<std::size_t, 2> grid{160, 120};
  std::array<std::size_t, 2> coarse{16, 12};
  std::string basename = "portrait";
};

struct SweepSpec {
  std::string param;
  std::vector<double> values;
  std::string task;  // classify | transient-time
  // classify task
  std::string fixed_point;
  bool empirical = false;
  // transient-time task
  State x0;
  double s = 0.0;
  std::size_t horizon = 100000;
};

struct RunConfig {
  std::string model;
  std::map<std::string, double> params;
  std::string observable;               // zoo observable name, or
  std::optional<State> observable_coeffs;  // explicit linear coefficients
  std::uint64_t seed = 0;
  std::optional<SimulateSpec> simulate;
  std::optional<TransientTimeSpec> transient_time;
  std::optional<ClassifySpec> classify;
  std::optional<SearchSpec> search;
  std::optional<PortraitSpec> portrait;
  std::optional<SweepSpec> sweep;
};

inline RunConfig parse_config(const Json& root) {
  cfg::require_keys(root, "config",
                    {"model", "params", "observable", "seed", "simulate", "transient-time",
                     "classify", "search", "portrait", "sweep"});
  RunConfig rc;
  if (!root.contains("model") || !root["model"].is_string())
    throw ConfigError("config: 'model' (string) is required");
  rc.model = root["model"].get<std::string>();

  if (root.contains("params")) {
    if (!root["params"].is_object()) throw ConfigError("config.params: expected an object");
    for (auto it = root["params"].begin(); it != root["params"].end(); ++it) {
      if (!it.value().is_number())
        throw ConfigError("config.params." + it.key() + ": expected a number");
      rc.params[it.key()] = it.value().get<double>();
    }
  }

  if (root.contains("observable")) {
    const Json& ov = root["observable"];
    if (ov.is_string()) {
      rc.observable = ov.get<std::string>();
    } else if (ov.is_array()) {
      rc.observable_coeffs = cfg::vec(ov, "config.observable");
    } else {
      throw ConfigError("config.observable: expected a name or an array of linear coefficients");
    }
  }

  rc.seed = cfg::u64_or(root, "config", "seed", 0);

  if (root.contains("simulate")) {
    const Json& j = root["simulate"];
    cfg::require_keys(j, "simulate", {"x0", "family", "steps", "svg", "threshold"});
    SimulateSpec s;
    if (j.contains("x0") && j.contains("family"))
      throw ConfigError("simulate: give either 'x0' or 'family', not both");
    if (j.contains("x0")) {
      s.initials.push_back(cfg::vec(j, "simulate", "x0"));
    } else if (j.contains("family")) {
      if (!j["family"].is_array()) throw ConfigError("simulate.family: expected an array of states");
      for (const auto& e : j["family"]) s.initials.push_back(cfg::vec(e, "simulate.family[]"));
      if (s.initials.empty()) throw ConfigError("simulate.family: must not be empty");
    } else {
      throw ConfigError("simulate: missing 'x0' (or 'family')");
    }
    s.steps = cfg::uint_or(j, "simulate", "steps", 100);
    if (s.steps < 1) throw ConfigError("simulate.steps: must be >= 1");
    s.svg = cfg::bool_or(j, "simulate", "svg", true);
    if (j.contains("threshold")) s.threshold = cfg::num(j, "simulate", "threshold");
    rc.simulate = std::move(s);
  }

  if (root.contains("transient-time")) {
    const Json& j = root["transient-time"];
    cfg::require_keys(j, "transient-time", {"x0", "s", "horizon", "T"});
    TransientTimeSpec t;
    t.x0 = cfg::vec(j, "transient-time", "x0");
    t.s = cfg::num(j, "transient-time", "s");
    if (!(t.s > 0.0)) throw ConfigError("transient-time.s: must be > 0");
    t.horizon = cfg::uint_or(j, "transient-time", "horizon", 100000);
    if (t.horizon < 1) throw ConfigError("transient-time.horizon: must be >= 1");
    if (j.contains("T")) t.transient_T = cfg::uint_or(j, "transient-time", "T", 0);
    rc.transient_time = std::move(t);
  }

  if (root.contains("classify")) {
    const Json& j = root["classify"];
    cfg::require_keys(j, "classify",
                      {"region", "grid", "tol", "empirical", "radii", "horizon", "samples"});
    ClassifySpec c;
    if (j.contains("region")) c.region = cfg::box(j, "classify", "region");
    if (j.contains("grid")) {
      std::vector<std::size_t> g;
      for (double v : cfg::vec(j, "classify", "grid")) g.push_back(static_cast<std::size_t>(v));
      c.grid = std::move(g);
    }
    c.tol = cfg::num_or(j, "classify", "tol", 1e-9);
    c.empirical = cfg::bool_or(j, "classify", "empirical", true);
    if (j.contains("radii")) c.radii = cfg::vec(j, "classify", "radii");
    c.horizon = cfg::uint_or(j, "classify", "horizon", 100000);
    c.samples = cfg::uint_or(j, "classify", "samples", 256);
    rc.classify = std::move(c);
  }

  if (root.contains("search")) {
    const Json& j = root["search"];
    cfg::require_keys(j, "search",
                      {"mode", "candidate", "radii", "horizon", "samples", "region", "s", "T",
                       "budget", "direction", "epsilons"});
    SearchSpec s;
    s.mode = cfg::str_or(j, "search", "mode", "");
    if (s.mode != "escape" && s.mode != "transient-points" && s.mode != "honeymoon")
      throw ConfigError("search.mode: expected escape | transient-points | honeymoon");
    s.horizon = cfg::uint_or(j, "search", "horizon", 100000);
    s.samples = cfg::uint_or(j, "search", "samples", 256);
    if (s.mode == "escape") {
      s.candidate = cfg::vec(j, "search", "candidate");
      if (j.contains("radii")) s.radii = cfg::vec(j, "search", "radii");
    } else if (s.mode == "transient-points") {
      s.region = cfg::box(j, "search", "region");
      s.s = cfg::num(j, "search", "s");
      s.transient_T = cfg::uint_or(j, "search", "T", 0);
      s.budget = cfg::uint_or(j, "search", "budget", 1024);
      if (s.budget < 1) throw ConfigError("search.budget: must be >= 1");
    } else {
      s.candidate = cfg::vec(j, "search", "candidate");
      s.direction = cfg::vec(j, "search", "direction");
      s.epsilons = cfg::vec(j, "search", "epsilons");
      s.s = cfg::num(j, "search", "s");
    }
    if (s.mode != "escape" && !(s.s > 0.0)) throw ConfigError("search.s: must be > 0");
    rc.search = std::move(s);
  }

  if (root.contains("portrait")) {
    const Json& j = root["portrait"];
    cfg::require_keys(j, "portrait", {"region", "grid", "coarse", "basename"});
    PortraitSpec p;
    p.region = cfg::box(j, "portrait", "region");
    if (j.contains("grid")) {
      const State g = cfg::vec(j, "portrait", "grid");
      if (g.size() != 2) throw ConfigError("portrait.grid: expected [nx, ny]");
      p.grid = {static_cast<std::size_t>(g[0]), static_cast<std::size_t>(g[1])};
    }
    if (j.contains("coarse")) {
      const State g = cfg::vec(j, "portrait", "coarse");
      if (g.size() != 2) throw ConfigError("portrait.coarse: expected [cx, cy]");
      p.coarse = {static_cast<std::size_t>(g[0]), static_cast<std::size_t>(g[1])};
    }
    p.basename = cfg::str_or(j, "portrait", "basename", "portrait");
    rc.portrait = std::move(p);
  }

  if (root.contains("sweep")) {
    const Json& j = root["sweep"];
    cfg::require_keys(j, "sweep",
                      {"param", "values", "from", "to", "step", "task", "fixed_point", "empirical",
                       "x0", "s", "horizon"});
    SweepSpec s;
    s.param = cfg::str_or(j, "sweep", "param", "");
    if (s.param.empty()) throw ConfigError("sweep.param: required");
    if (j.contains("values")) {
      s.values = cfg::vec(j, "sweep", "values");
    } else {
      const double from = cfg::num(j, "sweep", "from");
      const double to = cfg::num(j, "sweep", "to");
      const double step = cfg::num(j, "sweep", "step");
      if (!(step > 0.0)) throw ConfigError("sweep.step: must be > 0");
      const double span = (to - from) / step;
      const long long count = span < 0.0 ? 0 : static_cast<long long>(span + 1e-9) + 1;
      for (long long k = 0; k < count; ++k)
        s.values.push_back(from + static_cast<double>(k) * step);
    }
    s.task = cfg::str_or(j, "sweep", "task", "classify");
    if (s.task != "classify" && s.task != "transient-time")
      throw ConfigError("sweep.task: expected classify | transient-time");
    if (s.task == "classify") {
      s.fixed_point = cfg::str_or(j, "sweep", "fixed_point", "");
      if (s.fixed_point.empty())
        throw ConfigError("sweep.fixed_point: required for the classify task");
      s.empirical = cfg::bool_or(j, "sweep", "empirical", false);
    } else {
      s.x0 = cfg::vec(j, "sweep", "x0");
      s.s = cfg::num(j, "sweep", "s");
      s.horizon = cfg::uint_or(j, "sweep", "horizon", 100000);
    }
    rc.sweep = std::move(s);
  }

  return rc;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(root);
}

/// Built-in one-command reproductions of the reference figures.
inline std::string preset_text(const std::string& name) {
  if (name == "fig2") {
    return R"({
      "model": "example1",
      "params": {"h": 0.1},
      "observable": "x",
      "simulate": {"x0": [0.001, 0.0], "steps": 60, "threshold": 0.005}
    })";
  }
  if (name == "fig3") {
    return R"({
      "model": "example2",
      "params": {"a": 1.5, "b": 1.3},
      "observable": "x+y",
      "simulate": {"family": [[0.00073193, 0.00068138],
                              [0.0073193, 0.0068138],
                              [0.073193, 0.068138]],
                   "steps": 40}
    })";
  }
  if (name == "fig4") {
    return R"({
      "model": "streipert_pp",
      "params": {"r": 0.5, "K": 1.0, "alpha": 1.0, "gamma": 4.0, "d": 1.0},
      "observable": "y",
      "simulate": {"family": [[0.001, 0.0001], [0.01, 0.0001], [0.1, 0.0001]],
                   "steps": 100}
    })";
  }
  if (name == "fig6") {
    return R"({
      "model": "epidemic",
      "params": {"b": 115.0, "p": 0.003, "alpha": 4e-5},
      "observable": "I",
      "simulate": {"x0": [24000.0, 250.0], "steps": 400}
    })";
  }
  if (name == "fig4b") {
    return R"({
      "model": "streipert_pp",
      "params": {"r": 0.5, "K": 1.0, "alpha": 1.0, "gamma": 4.0, "d": 1.0},
      "portrait": {"region": [[0.0, 1.6], [0.0, 0.9]], "grid": [160, 120], "basename": "fig4b"}
    })";
  }
  if (name == "fig7a") {
    return R"({
      "model": "epidemic",
      "params": {"b": 1.0, "p": 0.3, "alpha": 0.8},
      "portrait": {"region": [[0.05, 4.0], [0.0, 2.5]], "grid": [160, 120], "basename": "fig7a"}
    })";
  }
  throw ConfigError("unknown preset '" + name + "' (try fig2, fig3, fig4, fig6, fig4b, fig7a)");
}

}  // namespace tscope
