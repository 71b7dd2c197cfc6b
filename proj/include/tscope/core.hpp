/**
 * @file core.hpp
 * @brief Discrete-time maps and observables, trajectory iteration, the
 *        one-step difference of an observable, and transient times.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tscope/types.hpp"

namespace tscope {

/// A discrete-time map x(t+1) = f(x(t)) on R^n. `eval` writes the next state
/// into a caller-provided buffer so hot loops do not allocate. Evaluation must
/// be deterministic: identical inputs produce bit-identical outputs.
struct MapSystem {
  std::size_t dim = 0;
  std::string name;
  std::function<void(const State&, State&)> eval;
  std::function<void(const State&, Mat&)> jac;  // optional analytic Jacobian
  std::map<std::string, double> params;
  Box domain;            // default [-1e6, 1e6]^n, set per model
  bool linear = false;   // declared-linear flag (enables the linear criteria)

  bool has_jacobian() const { return static_cast<bool>(jac); }

  State step(const State& x) const {
    State out(dim);
    eval(x, out);
    return out;
  }
};

inline MapSystem make_map(std::size_t n, std::string name,
                          std::function<void(const State&, State&)> eval,
                          std::function<void(const State&, Mat&)> jac = {}) {
  MapSystem m;
  m.dim = n;
  m.name = std::move(name);
  m.eval = std::move(eval);
  m.jac = std::move(jac);
  m.domain = Box::centered(n, 1e6);
  return m;
}

/// Scalar observable v : R^n -> R with optional analytic gradient. When the
/// observable is linear, v(x) = coeffs . x, `linear_coeffs` is set; several
/// criteria key off it.
struct Observable {
  std::string name;
  std::function<double(const State&)> eval;
  std::function<void(const State&, State&)> grad;  // optional
  std::optional<State> linear_coeffs;

  bool has_gradient() const { return static_cast<bool>(grad); }
};

inline Observable make_observable(std::string name, std::function<double(const State&)> eval,
                                  std::function<void(const State&, State&)> grad = {}) {
  Observable v;
  v.name = std::move(name);
  v.eval = std::move(eval);
  v.grad = std::move(grad);
  return v;
}

/// Linear observable v(x) = coeffs . x.
inline Observable linear_observable(std::string name, State coeffs) {
  Observable v;
  v.name = std::move(name);
  State c = coeffs;
  v.eval = [c](const State& x) { return dot(c, x); };
  v.grad = [c](const State&, State& g) { g = c; };
  v.linear_coeffs = std::move(coeffs);
  return v;
}

enum class IterStatus { Ok, NonFinite, DomainEscape };

inline const char* to_string(IterStatus s) {
  switch (s) {
    case IterStatus::Ok: return "Ok";
    case IterStatus::NonFinite: return "NonFinite";
    case IterStatus::DomainEscape: return "DomainEscape";
  }
  return "?";
}

/// An orbit segment x_0..x_T with the observable evaluated along it.
/// deltas[t] = observable_values[t+1] - observable_values[t].
/// When status != Ok the trajectory is the partial orbit up to the last valid
/// state and fail_step is the index of the step that failed.
struct Trajectory {
  std::vector<State> states;
  std::vector<double> observable_values;
  std::vector<double> deltas;
  IterStatus status = IterStatus::Ok;
  std::size_t fail_step = 0;

  std::size_t length() const { return states.size(); }
};

enum class TransientStatus { Finite, ExceededHorizon, NonFiniteState };

inline const char* to_string(TransientStatus s) {
  switch (s) {
    case TransientStatus::Finite: return "Finite";
    case TransientStatus::ExceededHorizon: return "ExceededHorizon";
    case TransientStatus::NonFiniteState: return "NonFiniteState";
  }
  return "?";
}

/// Result of a transient-time computation at threshold s over a finite horizon.
/// Finite:          |dv(f^time(xi))| > s and |dv(f^t(xi))| <= s for t < time.
/// ExceededHorizon: |dv(f^t(xi))| <= s for all t <= horizon. The true
///                  transient time may still be infinite; that is undecidable
///                  by simulation, so the horizon is recorded instead.
struct TransientTimeResult {
  TransientStatus status = TransientStatus::ExceededHorizon;
  std::size_t time = 0;          // defined when Finite
  double threshold = 0.0;        // s
  std::size_t horizon = 0;
  double trigger_delta = 0.0;    // |dv| at the triggering step, when Finite
  std::size_t fail_step = 0;     // step reached, when NonFiniteState
};

namespace detail {

inline IterStatus advance(const MapSystem& map, const State& x, State& out) {
  map.eval(x, out);
  if (!all_finite(out)) return IterStatus::NonFinite;
  if (!map.domain.contains(out)) return IterStatus::DomainEscape;
  return IterStatus::Ok;
}

}  // namespace detail

/// Iterates the map `steps` times from xi, recording states, v and dv.
/// Calls map.eval exactly `steps` times; stops early on blow-up or domain
/// escape, reporting the partial trajectory.
inline Trajectory iterate(const MapSystem& map, const State& xi, std::size_t steps,
                          const Observable& v) {
  Trajectory tr;
  tr.states.reserve(steps + 1);
  tr.observable_values.reserve(steps + 1);
  tr.deltas.reserve(steps);
  tr.states.push_back(xi);
  tr.observable_values.push_back(v.eval(xi));
  State next(map.dim);
  for (std::size_t t = 0; t < steps; ++t) {
    const IterStatus st = detail::advance(map, tr.states.back(), next);
    if (st != IterStatus::Ok) {
      tr.status = st;
      tr.fail_step = t + 1;
      return tr;
    }
    tr.states.push_back(next);
    const double vv = v.eval(next);
    tr.observable_values.push_back(vv);
    tr.deltas.push_back(vv - tr.observable_values[tr.observable_values.size() - 2]);
  }
  return tr;
}

/// One-step observable difference dv(x) = v(f(x)) - v(x). One map evaluation.
inline double delta_v(const MapSystem& map, const Observable& v, const State& x) {
  State next(map.dim);
  const IterStatus st = detail::advance(map, x, next);
  if (st != IterStatus::Ok) throw NonFiniteError("delta_v: map evaluation failed", 1);
  return v.eval(next) - v.eval(x);
}

/// First t <= horizon with |dv(f^t(xi))| > s (strict), else ExceededHorizon.
inline TransientTimeResult transient_time(const MapSystem& map, const Observable& v,
                                          const State& xi, double s, std::size_t horizon) {
  TransientTimeResult res;
  res.threshold = s;
  res.horizon = horizon;
  State cur = xi;
  State next(map.dim);
  double vcur = v.eval(cur);
  for (std::size_t t = 0; t <= horizon; ++t) {
    const IterStatus st = detail::advance(map, cur, next);
    if (st != IterStatus::Ok) {
      res.status = TransientStatus::NonFiniteState;
      res.fail_step = t + 1;
      return res;
    }
    const double vnext = v.eval(next);
    const double dv = vnext - vcur;
    if (std::fabs(dv) > s) {
      res.status = TransientStatus::Finite;
      res.time = t;
      res.trigger_delta = std::fabs(dv);
      return res;
    }
    cur.swap(next);
    vcur = vnext;
  }
  res.status = TransientStatus::ExceededHorizon;
  return res;
}

enum class TransientPointClass { IsTransientPoint, TooFast, NotObservedFinite };

inline const char* to_string(TransientPointClass c) {
  switch (c) {
    case TransientPointClass::IsTransientPoint: return "IsTransientPoint";
    case TransientPointClass::TooFast: return "TooFast";
    case TransientPointClass::NotObservedFinite: return "NotObservedFinite";
  }
  return "?";
}

/// xi is a (v,s,T)-transient point iff T < T_s(xi) < infinity. A run that
/// exceeds the horizon is reported NotObservedFinite: T_s = infinity cannot be
/// certified by simulation.
inline TransientPointClass classify_transient_point(const MapSystem& map, const Observable& v,
                                                    const State& xi, double s, std::size_t T,
                                                    std::size_t horizon,
                                                    TransientTimeResult* out = nullptr) {
  const TransientTimeResult r = transient_time(map, v, xi, s, horizon);
  if (out) *out = r;
  if (r.status == TransientStatus::Finite) {
    return r.time > T ? TransientPointClass::IsTransientPoint : TransientPointClass::TooFast;
  }
  return TransientPointClass::NotObservedFinite;
}

/// max_{t in 0:horizon} |dv(f^t(xi))|. A value of zero (to ~1e-12) is the
/// numeric surrogate for xi being in the candidate set X^v.
inline double candidate_residual(const MapSystem& map, const Observable& v, const State& xi,
                                 std::size_t horizon) {
  State cur = xi;
  State next(map.dim);
  double vcur = v.eval(cur);
  double worst = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    const IterStatus st = detail::advance(map, cur, next);
    if (st != IterStatus::Ok) throw NonFiniteError("candidate_residual: orbit left the domain", t + 1);
    const double vnext = v.eval(next);
    worst = std::max(worst, std::fabs(vnext - vcur));
    cur.swap(next);
    vcur = vnext;
  }
  return worst;
}

/// Streaming max of |dv(f^t(xi))| for t in 0:horizon. Used by the empirical
/// search; orbits that blow up or leave the domain contribute the partial
/// maximum accumulated while both endpoints of each step were valid.
inline double max_abs_delta_v(const MapSystem& map, const Observable& v, const State& xi,
                              std::size_t horizon) {
  State cur = xi;
  State next(map.dim);
  double vcur = v.eval(cur);
  double worst = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (detail::advance(map, cur, next) != IterStatus::Ok) break;
    const double vnext = v.eval(next);
    worst = std::max(worst, std::fabs(vnext - vcur));
    cur.swap(next);
    vcur = vnext;
  }
  return worst;
}

}  // namespace tscope
