#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "tscope/core.hpp"
#include "tscope/io.hpp"
#include "tscope/rng.hpp"
#include "tscope/zoo.hpp"

using namespace tscope;

namespace {

// Independent brute-force oracle for the worked planar example: direct loop,
// no library calls. Returns the first t with |v(f^{t+1}) - v(f^t)| > s, or -1.
long long example1_oracle_time(double h, double x0, double y0, double s, long long horizon,
                               double* trigger = nullptr) {
  double x = x0, y = y0;
  for (long long t = 0; t <= horizon; ++t) {
    const double xn = x * (1.0 - h * y);
    const double yn = y + h * (x - 1.0);
    const double dv = xn - x;  // v = x
    if (std::fabs(dv) > s) {
      if (trigger) *trigger = std::fabs(dv);
      return t;
    }
    x = xn;
    y = yn;
  }
  return -1;
}

}  // namespace

TEST_CASE("iterate: invariant axis of example1") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  const Trajectory tr = iterate(zm.map, {0.0, 5.0}, 5, zm.entry.observable("x"));
  REQUIRE(tr.status == IterStatus::Ok);
  REQUIRE(tr.states.size() == 6);
  CHECK(tr.states[3][0] == 0.0);
  CHECK(tr.states[3][1] == doctest::Approx(4.7).epsilon(1e-12));
  for (double d : tr.deltas) CHECK(d == 0.0);
}

TEST_CASE("iterate: fixed point stays put") {
  const ZooModel zm = build("cubic1d");
  const Trajectory tr = iterate(zm.map, {0.0}, 10, zm.entry.observable("x"));
  for (const State& s : tr.states) CHECK(s[0] == 0.0);
}

TEST_CASE("iterate: predator-prey collapse-then-outbreak shape") {
  const ZooModel pp = build("streipert_pp");
  const Trajectory tr = iterate(pp.map, {1e-3, 1e-4}, 100, pp.entry.observable("y"));
  REQUIRE(tr.status == IterStatus::Ok);

  // Prey recovers toward K = 1 while the predator is still collapsed...
  std::size_t t_recovered = 0;
  for (std::size_t t = 0; t < tr.states.size(); ++t) {
    if (tr.states[t][0] > 0.9) {
      t_recovered = t;
      break;
    }
  }
  REQUIRE(t_recovered > 0);
  CHECK(tr.states[t_recovered][1] < 0.01);

  // ...then the predator spikes.
  double peak = 0.0;
  for (std::size_t t = t_recovered; t < tr.states.size(); ++t)
    peak = std::max(peak, tr.states[t][1]);
  CHECK(peak > 0.1);
}

TEST_CASE("iterate: map evaluation count is exactly steps") {
  int evals = 0;
  MapSystem m = make_map(1, "counter", [&evals](const State& x, State& out) {
    ++evals;
    out[0] = 0.5 * x[0];
  });
  const Observable v = linear_observable("x", {1.0});
  iterate(m, {1.0}, 17, v);
  CHECK(evals == 17);
}

TEST_CASE("iterate: blow-up reports partial trajectory") {
  MapSystem m = make_map(1, "blow", [](const State& x, State& out) {
    out[0] = x[0] > 2.0 ? std::numeric_limits<double>::quiet_NaN() : x[0] + 1.0;
  });
  const Observable v = linear_observable("x", {1.0});
  const Trajectory tr = iterate(m, {0.0}, 10, v);
  CHECK(tr.status == IterStatus::NonFinite);
  CHECK(tr.states.size() == tr.fail_step);
  CHECK(tr.deltas.size() + 1 == tr.states.size());
}

TEST_CASE("iterate: leaving the domain box stops the orbit") {
  MapSystem m = make_map(1, "double", [](const State& x, State& out) { out[0] = 2.0 * x[0]; });
  m.domain = Box::centered(1, 100.0);
  const Trajectory tr = iterate(m, {1.0}, 64, linear_observable("x", {1.0}));
  CHECK(tr.status == IterStatus::DomainEscape);
  CHECK(tr.states.back()[0] == 64.0);  // 128 would leave [-100, 100]
}

TEST_CASE("delta_v: worked values") {
  const ZooModel ex1 = build("example1", {{"h", 0.1}});
  const Observable vx = ex1.entry.observable("x");
  CHECK(delta_v(ex1.map, vx, {2.0, 3.0}) == doctest::Approx(-0.6).epsilon(1e-12));

  const ZooModel cub = build("cubic1d");
  CHECK(delta_v(cub.map, cub.entry.observable("xsq"), {1.0}) == 8.0);
  CHECK(delta_v(cub.map, cub.entry.observable("xsq"), {0.0}) == 0.0);

  const ZooModel pp = build("streipert_pp");
  CHECK(delta_v(pp.map, pp.entry.observable("y"), {0.0, 0.0}) == 0.0);
}

TEST_CASE("transient_time: example1 matches the brute-force oracle exactly") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  const Observable v = zm.entry.observable("x");
  const double s = 0.005;  // = h^2 / 2

  double trig = 0.0;
  const long long t_oracle = example1_oracle_time(0.1, 1e-3, 0.0, s, 1000000, &trig);
  REQUIRE(t_oracle >= 0);
  CHECK(t_oracle == 26);  // frozen regression constant

  const TransientTimeResult res = transient_time(zm.map, v, {1e-3, 0.0}, s, 1000000);
  REQUIRE(res.status == TransientStatus::Finite);
  CHECK(static_cast<long long>(res.time) == t_oracle);
  CHECK(res.trigger_delta == trig);
  CHECK(res.trigger_delta > s);

  // Before the trigger every increment stays at or below the threshold.
  const Trajectory tr = iterate(zm.map, {1e-3, 0.0}, res.time, v);
  for (double d : tr.deltas) CHECK(std::fabs(d) <= s);
}

TEST_CASE("transient_time: epidemic reference trajectory") {
  // Oracle: direct loop over the reduced epidemic recurrences from the
  // reference initial condition. The infected count first collapses (|dI|
  // peaks at 13.99 on step 5), stays near zero through the honeymoon, then
  // rebounds with |dI| never exceeding 8.04 again. A threshold below the
  // initial collapse therefore triggers during the collapse.
  const double b = 115.0, p = 0.003, al = 4e-5, s = 12.0;
  long long t_oracle = -1;
  {
    double S = 2.4e4, I = 250.0;
    for (long long t = 0; t <= 100000; ++t) {
      const double Sn = (1.0 - p) * S - al * S * I + b;
      const double In = al * S * I;
      if (std::fabs(In - I) > s) {
        t_oracle = t;
        break;
      }
      S = Sn;
      I = In;
    }
  }
  CHECK(t_oracle == 2);  // frozen regression constant

  const ZooModel epi = build("epidemic");
  const TransientTimeResult res =
      transient_time(epi.map, epi.entry.observable("I"), {2.4e4, 250.0}, s, 100000);
  REQUIRE(res.status == TransientStatus::Finite);
  CHECK(static_cast<long long>(res.time) == t_oracle);

  // From within the honeymoon regime (tiny infected seed) the same threshold
  // scale triggers only in the delayed outbreak.
  const TransientTimeResult hm =
      transient_time(epi.map, epi.entry.observable("I"), {2.4e4, 1e-3}, 6.9968059201157899,
                     100000);
  REQUIRE(hm.status == TransientStatus::Finite);
  CHECK(hm.time > 100);
}

TEST_CASE("transient_time: constant orbit exceeds any horizon") {
  const ZooModel pp = build("streipert_pp");
  const TransientTimeResult res =
      transient_time(pp.map, pp.entry.observable("y"), {0.0, 0.0}, 1e-12, 5000);
  CHECK(res.status == TransientStatus::ExceededHorizon);
}

TEST_CASE("transient_time: ties at exactly s do not trigger") {
  MapSystem m = make_map(1, "shift", [](const State& x, State& out) { out[0] = x[0] + 0.5; });
  const Observable v = linear_observable("x", {1.0});
  CHECK(transient_time(m, v, {0.0}, 0.5, 100).status == TransientStatus::ExceededHorizon);
  CHECK(transient_time(m, v, {0.0}, 0.49, 100).status == TransientStatus::Finite);
}

TEST_CASE("classify_transient_point") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  const Observable v = zm.entry.observable("x");
  CHECK(classify_transient_point(zm.map, v, {1e-3, 0.0}, 0.005, 10, 100000) ==
        TransientPointClass::IsTransientPoint);
  CHECK(classify_transient_point(zm.map, v, {1e-3, 0.0}, 0.005, 26, 100000) ==
        TransientPointClass::TooFast);  // T_s = 26 is not > 26
  CHECK(classify_transient_point(zm.map, v, {2.0, 3.0}, 0.1, 4, 100000) ==
        TransientPointClass::TooFast);  // triggers at t = 0
  const ZooModel pp = build("streipert_pp");
  CHECK(classify_transient_point(pp.map, pp.entry.observable("y"), {0.0, 0.0}, 0.01, 10, 2000) ==
        TransientPointClass::NotObservedFinite);
}

TEST_CASE("candidate_residual") {
  const ZooModel pp = build("streipert_pp");
  const Observable v2 = pp.entry.observable("y");
  CHECK(candidate_residual(pp.map, v2, {0.3, 0.0}, 2000) == 0.0);
  CHECK(candidate_residual(pp.map, v2, {1.7, 0.0}, 2000) == 0.0);

  const ZooModel epi = build("epidemic");
  CHECK(candidate_residual(epi.map, epi.entry.observable("I"), {20000.0, 0.0}, 2000) == 0.0);

  const ZooModel ex1 = build("example1", {{"h", 0.1}});
  CHECK(candidate_residual(ex1.map, ex1.entry.observable("x"), {0.5, 0.5}, 1) ==
        doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("property: affine observable invariance of transient times") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  Rng rng(2024);
  int finite_seen = 0;
  for (int k = 0; k < 60; ++k) {
    const State xi{rng.uniform(0.0, 1.5), rng.uniform(-1.0, 1.0)};
    const double s = std::pow(10.0, rng.uniform(-4.0, -1.0));
    const double alpha =
        (rng.uniform01() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, rng.uniform(-1.0, 1.0));
    const double beta = rng.uniform(-5.0, 5.0);

    const Observable v = zm.entry.observable("x");
    const Observable vt = make_observable(
        "affine", [alpha, beta, v](const State& x) { return alpha * v.eval(x) + beta; });
    const TransientTimeResult a = transient_time(zm.map, v, xi, s, 3000);
    const TransientTimeResult b = transient_time(zm.map, vt, xi, std::fabs(alpha) * s, 3000);
    CHECK(a.status == b.status);
    if (a.status == TransientStatus::Finite) {
      ++finite_seen;
      CHECK(a.time == b.time);
    }
  }
  CHECK(finite_seen > 20);
}

TEST_CASE("property: orbit shift of transient points") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  const Observable v = zm.entry.observable("x");
  Rng rng(7);
  for (int k = 0; k < 40; ++k) {
    const State xi{std::pow(10.0, rng.uniform(-6.0, -2.0)), rng.uniform(-0.01, 0.01)};
    const std::size_t T = 2 + static_cast<std::size_t>(rng.uniform01() * 10);
    if (classify_transient_point(zm.map, v, xi, 0.005, T + 1, 100000) ==
        TransientPointClass::IsTransientPoint) {
      const State fxi = zm.map.step(xi);
      CHECK(classify_transient_point(zm.map, v, fxi, 0.005, T, 100000) ==
            TransientPointClass::IsTransientPoint);
    }
  }
}

TEST_CASE("property: threshold monotonicity") {
  const ZooModel zm = build("example1", {{"h", 0.1}});
  const Observable v = zm.entry.observable("x");
  Rng rng(99);
  for (int k = 0; k < 40; ++k) {
    const State xi{std::pow(10.0, rng.uniform(-5.0, -1.0)), rng.uniform(-0.1, 0.1)};
    double s1 = std::pow(10.0, rng.uniform(-4.0, -1.0));
    double s2 = std::pow(10.0, rng.uniform(-4.0, -1.0));
    if (s1 > s2) std::swap(s1, s2);
    const TransientTimeResult a = transient_time(zm.map, v, xi, s1, 100000);
    const TransientTimeResult b = transient_time(zm.map, v, xi, s2, 100000);
    if (a.status == TransientStatus::Finite && b.status == TransientStatus::Finite)
      CHECK(a.time <= b.time);
  }
}

TEST_CASE("property: iteration is deterministic") {
  const ZooModel pp = build("streipert_pp");
  const Observable v = pp.entry.observable("y");
  const Trajectory a = iterate(pp.map, {0.123, 0.456}, 500, v);
  const Trajectory b = iterate(pp.map, {0.123, 0.456}, 500, v);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t t = 0; t < a.states.size(); ++t) {
    CHECK(a.states[t] == b.states[t]);
    CHECK(a.observable_values[t] == b.observable_values[t]);
  }
}

TEST_CASE("property: 17-significant-digit formatting round-trips binary64") {
  Rng rng(123);
  for (int k = 0; k < 2000; ++k) {
    double v;
    switch (k % 4) {
      case 0: v = rng.uniform(-1e6, 1e6); break;
      case 1: v = std::pow(10.0, rng.uniform(-300.0, 300.0)); break;
      case 2: v = -std::pow(10.0, rng.uniform(-300.0, -250.0)); break;
      default: v = rng.normal(); break;
    }
    CHECK(std::stod(fmt_g17(v)) == v);
  }
  CHECK(std::stod(fmt_g17(0.0)) == 0.0);
  CHECK(std::stod(fmt_g17(-0.0)) == 0.0);
}

TEST_CASE("trajectory CSV round-trips binary64 exactly") {
  const ZooModel pp = build("streipert_pp");
  const Trajectory tr = iterate(pp.map, {0.3, 0.2}, 25, pp.entry.observable("y"));
  std::ostringstream ss;
  write_trajectory_csv(ss, tr);

  std::istringstream is(ss.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x1,x2,v,delta_v");
  std::size_t t = 0;
  while (std::getline(is, line)) {
    const auto f = split_csv_line(line);
    REQUIRE(f.size() == 5);
    CHECK(std::stoull(f[0]) == t);
    CHECK(std::stod(f[1]) == tr.states[t][0]);
    CHECK(std::stod(f[2]) == tr.states[t][1]);
    CHECK(std::stod(f[3]) == tr.observable_values[t]);
    if (t < tr.deltas.size())
      CHECK(std::stod(f[4]) == tr.deltas[t]);
    else
      CHECK(f[4].empty());
    ++t;
  }
  CHECK(t == tr.states.size());
}
