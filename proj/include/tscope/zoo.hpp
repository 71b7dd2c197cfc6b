/**
 * @file zoo.hpp
 * @brief Built-in parameterized models with analytic Jacobians, named
 *        observables, closed-form fixed points and certified ground
 *        truths. Parameter values from the reference figures ship as presets.
 */
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tscope/core.hpp"
#include "tscope/linalg.hpp"
#include "tscope/verdict.hpp"

namespace tscope {

struct InvalidParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KnownFixedPointSpec {
  std::string name;
  State location;
};

/// One executable expectation: classifying `point` under the named observable
/// should yield `expected`, normally via `route`.
struct GroundTruth {
  std::string point_name;
  State point;
  std::string observable;
  Decision expected = Decision::Inconclusive;
  Criterion route = Criterion::None;
  std::string source;  // short provenance label for reporting
};

struct ZooEntry {
  std::string model_id;
  std::map<std::string, double> params;
  std::vector<Observable> observables;
  std::vector<KnownFixedPointSpec> known_fixed_points;
  std::vector<GroundTruth> ground_truths;
  Box classify_region;
  std::vector<std::size_t> classify_grid;

  const Observable& observable(const std::string& name) const {
    for (const auto& v : observables) {
      if (v.name == name) return v;
    }
    throw std::invalid_argument("model '" + model_id + "' has no observable '" + name + "'");
  }

  const KnownFixedPointSpec* fixed_point(const std::string& name) const {
    for (const auto& fp : known_fixed_points) {
      if (fp.name == name) return &fp;
    }
    return nullptr;
  }
};

struct ZooModel {
  MapSystem map;
  ZooEntry entry;
};

/// Emits the stored executable expectations; the test harness consumes these.
inline const std::vector<GroundTruth>& ground_truth_suite(const ZooEntry& entry) {
  return entry.ground_truths;
}

namespace detail {

inline std::map<std::string, double> merge_params(const std::map<std::string, double>& defaults,
                                                  const std::map<std::string, double>& given,
                                                  const std::string& model_id) {
  std::map<std::string, double> out = defaults;
  for (const auto& [k, v] : given) {
    if (out.find(k) == out.end())
      throw InvalidParams("model '" + model_id + "' has no parameter '" + k + "'");
    out[k] = v;
  }
  return out;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParams(what);
}

}  // namespace detail

inline std::vector<std::string> zoo_ids() {
  return {"example1", "example2", "cubic1d", "linear_custom", "streipert_pp", "epidemic"};
}

inline ZooModel build_example1(const std::map<std::string, double>& given) {
  const auto p = detail::merge_params({{"h", 0.1}}, given, "example1");
  const double h = p.at("h");
  detail::require(h > 0.0 && h < 1.0, "example1 requires h in (0,1), got h=" + std::to_string(h));

  ZooModel m;
  m.map = make_map(
      2, "example1",
      [h](const State& x, State& out) {
        out[0] = x[0] * (1.0 - h * x[1]);
        out[1] = x[1] + h * (x[0] - 1.0);
      },
      [h](const State& x, Mat& j) {
        j = Mat(2, 2);
        j(0, 0) = 1.0 - h * x[1];
        j(0, 1) = -h * x[0];
        j(1, 0) = h;
        j(1, 1) = 1.0;
      });
  m.map.params = p;

  m.entry.model_id = "example1";
  m.entry.params = p;
  m.entry.observables = {linear_observable("x", {1.0, 0.0}), linear_observable("y", {0.0, 1.0})};
  m.entry.known_fixed_points = {{"P1", {1.0, 0.0}}};
  m.entry.ground_truths = {{"origin", {0.0, 0.0}, "x", Decision::Center, Criterion::Empirical,
                            "worked example, by-hand construction"}};
  m.entry.classify_region = Box{{-2.0, -2.0}, {2.0, 2.0}};
  m.entry.classify_grid = {9, 9};
  return m;
}

inline ZooModel build_example2(const std::map<std::string, double>& given) {
  const auto p = detail::merge_params({{"a", 1.5}, {"b", 1.3}}, given, "example2");
  const double a = p.at("a"), b = p.at("b");
  detail::require(a > 0.0 && b > 0.0, "example2 requires a > 0 and b > 0");

  ZooModel m;
  m.map = make_map(
      2, "example2",
      [a, b](const State& x, State& out) {
        out[0] = a * x[1] / (1.0 + x[0] * x[0]);
        out[1] = b * x[0] / (1.0 + x[1] * x[1]);
      },
      [a, b](const State& x, Mat& j) {
        const double u = 1.0 + x[0] * x[0], w = 1.0 + x[1] * x[1];
        j = Mat(2, 2);
        j(0, 0) = -2.0 * a * x[0] * x[1] / (u * u);
        j(0, 1) = a / u;
        j(1, 0) = b / w;
        j(1, 1) = -2.0 * b * x[0] * x[1] / (w * w);
      });
  m.map.params = p;

  m.entry.model_id = "example2";
  m.entry.params = p;
  m.entry.observables = {linear_observable("x+y", {1.0, 1.0}), linear_observable("x", {1.0, 0.0}),
                         linear_observable("y", {0.0, 1.0})};
  m.entry.known_fixed_points = {{"origin", {0.0, 0.0}}};
  // ab > 1 is the ground-truth precondition, not a construction error.
  if (a * b > 1.0) {
    m.entry.ground_truths = {{"origin", {0.0, 0.0}, "x+y", Decision::Center,
                              Criterion::PerronFrobenius, "nonnegative irreducible linearization"}};
  }
  m.entry.classify_region = Box{{-2.0, -2.0}, {2.0, 2.0}};
  m.entry.classify_grid = {9, 9};
  return m;
}

inline ZooModel build_cubic1d(const std::map<std::string, double>& given) {
  const auto p = detail::merge_params({}, given, "cubic1d");

  ZooModel m;
  m.map = make_map(
      1, "cubic1d",
      [](const State& x, State& out) { out[0] = 2.0 * x[0] + x[0] * x[0] * x[0]; },
      [](const State& x, Mat& j) {
        j = Mat(1, 1);
        j(0, 0) = 2.0 + 3.0 * x[0] * x[0];
      });
  m.map.params = p;

  Observable xsq = make_observable(
      "xsq", [](const State& x) { return x[0] * x[0]; },
      [](const State& x, State& g) { g = {2.0 * x[0]}; });

  m.entry.model_id = "cubic1d";
  m.entry.params = p;
  m.entry.observables = {xsq, linear_observable("x", {1.0})};
  m.entry.known_fixed_points = {{"origin", {0.0}}};
  m.entry.ground_truths = {{"origin", {0.0}, "xsq", Decision::Center, Criterion::HessianFlatness,
                            "flat gradient, definite Hessian of dv"}};
  m.entry.classify_region = Box{{-1.0}, {1.0}};
  m.entry.classify_grid = {11};
  return m;
}

inline ZooModel build_linear_custom(const std::map<std::string, double>& given) {
  const auto p = detail::merge_params(
      {{"a11", 0.0}, {"a12", 1.5}, {"a21", 1.3}, {"a22", 0.0}}, given, "linear_custom");
  Mat a(2, 2);
  a(0, 0) = p.at("a11");
  a(0, 1) = p.at("a12");
  a(1, 0) = p.at("a21");
  a(1, 1) = p.at("a22");
  for (double v : a.a) detail::require(std::isfinite(v), "linear_custom requires finite entries");

  ZooModel m;
  m.map = make_map(
      2, "linear_custom",
      [a](const State& x, State& out) {
        out[0] = a(0, 0) * x[0] + a(0, 1) * x[1];
        out[1] = a(1, 0) * x[0] + a(1, 1) * x[1];
      },
      [a](const State&, Mat& j) { j = a; });
  m.map.params = p;
  m.map.linear = true;

  m.entry.model_id = "linear_custom";
  m.entry.params = p;
  m.entry.observables = {linear_observable("x+y", {1.0, 1.0}), linear_observable("x", {1.0, 0.0}),
                         linear_observable("y", {0.0, 1.0})};
  m.entry.known_fixed_points = {{"origin", {0.0, 0.0}}};
  if (nonneg_irreducible(a)) {
    const SpectralSummary sp = eigen_summary(a);
    if (sp.spectral_radius > 1.0 + 1e-6) {
      m.entry.ground_truths = {{"origin", {0.0, 0.0}, "x+y", Decision::Center,
                                Criterion::PerronFrobenius,
                                "nonnegative irreducible matrix, rho > 1"}};
    }
  }
  m.entry.classify_region = Box{{-1.0, -1.0}, {1.0, 1.0}};
  m.entry.classify_grid = {5, 5};
  return m;
}

inline ZooModel build_streipert_pp(const std::map<std::string, double>& given) {
  const auto p = detail::merge_params(
      {{"r", 0.5}, {"K", 1.0}, {"alpha", 1.0}, {"gamma", 4.0}, {"d", 1.0}}, given, "streipert_pp");
  const double r = p.at("r"), K = p.at("K"), al = p.at("alpha"), ga = p.at("gamma"), d = p.at("d");
  detail::require(r > 0.0 && K > 0.0 && al > 0.0 && ga > 0.0 && d > 0.0,
                  "streipert_pp requires r, K, alpha, gamma, d > 0");

  ZooModel m;
  m.map = make_map(
      2, "streipert_pp",
      [r, K, al, ga, d](const State& x, State& out) {
        out[0] = (1.0 + r) * x[0] / (1.0 + (r / K) * x[0] + al * x[1]);
        out[1] = (1.0 + ga * x[0]) * x[1] / (1.0 + d);
      },
      [r, K, al, ga, d](const State& x, Mat& j) {
        const double u = 1.0 + (r / K) * x[0] + al * x[1];
        j = Mat(2, 2);
        j(0, 0) = (1.0 + r) * (1.0 + al * x[1]) / (u * u);
        j(0, 1) = -(1.0 + r) * x[0] * al / (u * u);
        j(1, 0) = ga * x[1] / (1.0 + d);
        j(1, 1) = (1.0 + ga * x[0]) / (1.0 + d);
      });
  m.map.params = p;
  // Populations are nonnegative; the map's pole line lives in the negative
  // quadrant, so the domain is the biological cone.
  m.map.domain = Box{{0.0, 0.0}, {1e6, 1e6}};

  m.entry.model_id = "streipert_pp";
  m.entry.params = p;
  m.entry.observables = {linear_observable("x", {1.0, 0.0}), linear_observable("y", {0.0, 1.0})};
  const double D = d / ga;
  m.entry.known_fixed_points = {{"E0", {0.0, 0.0}}, {"E_K", {K, 0.0}}};
  if (D < K) {
    const double nd = (r / al) * (1.0 - D / K);
    m.entry.known_fixed_points.push_back({"E_int", {D, nd}});
  }
  m.entry.ground_truths = {
      {"E0", {0.0, 0.0}, "x", Decision::Center, Criterion::GradientEigvecH2,
       "unstable prey direction at extinction"}};
  if (d < ga * K) {
    m.entry.ground_truths.push_back({"E_K", {K, 0.0}, "y", Decision::Center,
                                     Criterion::GradientEigvecH2,
                                     "predator invasion at carrying capacity"});
    m.entry.ground_truths.push_back({"E_K", {K, 0.0}, "x", Decision::Center,
                                     Criterion::GradientEigvecH2,
                                     "prey observable at carrying capacity"});
    m.entry.ground_truths.push_back({"E0", {0.0, 0.0}, "y", Decision::Center, Criterion::Empirical,
                                     "predator axis, outbreak after prey recovery"});
    m.entry.ground_truths.push_back({"chi_D_sample", {0.4 * D, 0.0}, "y", Decision::Center,
                                     Criterion::Empirical, "predator-extinction axis within chi_D"});
    m.entry.ground_truths.push_back({"chi_sample_beyond_K", {1.5 * K, 0.0}, "y", Decision::Center,
                                     Criterion::Empirical, "predator-extinction axis beyond K"});
  }
  m.entry.classify_region = Box{{0.0, 0.0}, {2.0 * K, 2.0 * K}};
  m.entry.classify_grid = {13, 13};
  return m;
}

inline ZooModel build_epidemic(const std::map<std::string, double>& given) {
  const auto p =
      detail::merge_params({{"b", 115.0}, {"p", 0.003}, {"alpha", 4e-5}}, given, "epidemic");
  const double b = p.at("b"), pv = p.at("p"), al = p.at("alpha");
  detail::require(b > 0.0, "epidemic requires b > 0");
  detail::require(pv >= 0.0 && pv < 1.0, "epidemic requires p in [0,1)");
  detail::require(al > 0.0 && al < 1.0, "epidemic requires alpha in (0,1)");

  ZooModel m;
  m.map = make_map(
      2, "epidemic",
      [b, pv, al](const State& x, State& out) {
        out[0] = (1.0 - pv) * x[0] - al * x[0] * x[1] + b;
        out[1] = al * x[0] * x[1];
      },
      [b, pv, al](const State& x, Mat& j) {
        j = Mat(2, 2);
        j(0, 0) = (1.0 - pv) - al * x[1];
        j(0, 1) = -al * x[0];
        j(1, 0) = al * x[1];
        j(1, 1) = al * x[0];
        (void)b;
      });
  m.map.params = p;
  m.map.domain = Box{{0.0, 0.0}, {1e6, 1e6}};

  m.entry.model_id = "epidemic";
  m.entry.params = p;
  m.entry.observables = {linear_observable("I", {0.0, 1.0}), linear_observable("S", {1.0, 0.0})};

  const double r0 = pv > 0.0 ? al * b / pv : std::numeric_limits<double>::infinity();
  double i_star = 0.0;
  if (pv > 0.0) {
    m.entry.known_fixed_points.push_back({"E0", {b / pv, 0.0}});
    if (r0 > 1.0) {
      // The endemic infected level consistent with the map itself is
      // I* = b - p/alpha = (p/alpha)(R0 - 1).
      i_star = b - pv / al;
      m.entry.known_fixed_points.push_back({"E_star", {1.0 / al, i_star}});
    }
  } else {
    m.entry.known_fixed_points.push_back({"E_star", {1.0 / al, b}});
  }

  if (pv > 0.0 && r0 > 1.0) {
    m.entry.ground_truths.push_back({"E0", {b / pv, 0.0}, "I", Decision::Center,
                                     Criterion::GradientEigvecH2,
                                     "disease-free state above threshold"});
    m.entry.ground_truths.push_back({"Gamma_sample", {0.8 / al, 0.0}, "I", Decision::Center,
                                     Criterion::Empirical, "infection-free axis, honeymoon"});
    if (r0 < 2.0 / pv && al * b < 2.0) {
      m.entry.ground_truths.push_back({"E_star", {1.0 / al, i_star}, "I", Decision::NotCenter,
                                       Criterion::StableExclusion,
                                       "asymptotically stable endemic state"});
    }
  }
  const double s_hi = pv > 0.0 ? 1.3 * b / pv : 2.0 / al;
  m.entry.classify_region = Box{{0.0, 0.0}, {s_hi, std::max(100.0, 3.0 * std::max(i_star, b))}};
  m.entry.classify_grid = {13, 13};
  return m;
}

/// The 3-compartment variant (S, I, R); total population is conserved. Used
/// only as a diagnostic; the dynamics are governed by the reduced system.
inline MapSystem build_epidemic_full(const std::map<std::string, double>& given) {
  const auto p =
      detail::merge_params({{"b", 115.0}, {"p", 0.003}, {"alpha", 4e-5}}, given, "epidemic");
  const double b = p.at("b"), pv = p.at("p"), al = p.at("alpha");
  MapSystem m = make_map(3, "epidemic_full", [b, pv, al](const State& x, State& out) {
    out[0] = (1.0 - pv) * x[0] - al * x[0] * x[1] + b;
    out[1] = al * x[0] * x[1];
    out[2] = x[2] + x[1] - b + pv * x[0];
  });
  m.params = p;
  return m;
}

inline ZooModel build(const std::string& model_id, const std::map<std::string, double>& params = {}) {
  if (model_id == "example1") return build_example1(params);
  if (model_id == "example2") return build_example2(params);
  if (model_id == "cubic1d") return build_cubic1d(params);
  if (model_id == "linear_custom") return build_linear_custom(params);
  if (model_id == "streipert_pp") return build_streipert_pp(params);
  if (model_id == "epidemic") return build_epidemic(params);
  throw InvalidParams("unknown model id '" + model_id + "'");
}

}  // namespace tscope
