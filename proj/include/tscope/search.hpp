/**
 * @file search.hpp
 * @brief Empirical verification tools: the sampled double supremum
 *        sup_{x in B_r} sup_t |dv(f^t(x))|, escape profiles over shrinking
 *        radii, transient-point search and honeymoon scaling tables.
 *
 * Everything here is seed-deterministic: identical inputs and seed give
 * byte-identical results, serial or parallel. Each sample derives its own
 * sub-seed from (seed, radius index, sample index) and the per-radius
 * reduction is a max, so thread scheduling cannot change the outcome.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "tscope/core.hpp"
#include "tscope/rng.hpp"
#include "tscope/verdict.hpp"

namespace tscope {

/// The candidate point fails the X^v membership precondition: some forward
/// iterate moves the observable by more than the tolerance.
struct CandidateNotInXv : std::runtime_error {
  double residual;
  explicit CandidateNotInXv(double resid)
      : std::runtime_error("candidate is not in the numeric X^v (residual " +
                           std::to_string(resid) + " > 1e-10)"),
        residual(resid) {}
};

struct SearchOptions {
  std::size_t horizon = 100000;
  std::size_t samples = 256;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::vector<State> extra_directions;  // e.g. unstable eigenvectors, probed at r/2
};

constexpr double kXvResidualTol = 1e-10;

struct EscapeProfile {
  State candidate;
  std::vector<double> radii;       // as given, typically decreasing
  std::vector<double> escape_sup;  // sampled double supremum per radius
  std::size_t horizon = 0;
  std::size_t samples_per_radius = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Max over the sampled ball of the orbit-wise max of |dv|. Samples falling
/// outside the map's domain box are skipped; orbits leaving it contribute
/// their partial max.
inline double escape_supremum_impl(const MapSystem& map, const Observable& v,
                                   const State& candidate, double r, const SearchOptions& opt,
                                   std::uint64_t radius_seed) {
  const std::size_t n = map.dim;
  std::vector<State> probes;
  for (std::size_t i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      State p = candidate;
      p[i] += sign * r / 2.0;
      probes.push_back(std::move(p));
    }
  }
  for (const State& d : opt.extra_directions) {
    const double nrm = norm2(d);
    if (!(nrm > 0.0)) continue;
    for (double sign : {1.0, -1.0}) {
      State p = candidate;
      for (std::size_t i = 0; i < n; ++i) p[i] += sign * (r / 2.0) * d[i] / nrm;
      probes.push_back(std::move(p));
    }
  }

  auto sample_value = [&](std::size_t k) -> double {
    State x;
    if (k < probes.size()) {
      x = probes[k];
    } else {
      Rng rng(derive_seed(radius_seed, k - probes.size()));
      x = rng.in_ball(candidate, r);
    }
    if (!map.domain.contains(x) || !all_finite(x)) return 0.0;
    return max_abs_delta_v(map, v, x, opt.horizon);
  };

  const std::size_t total = probes.size() + opt.samples;
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, total));
  if (jobs == 1) {
    double sup = 0.0;
    for (std::size_t k = 0; k < total; ++k) sup = std::max(sup, sample_value(k));
    return sup;
  }
  std::vector<double> part(jobs, 0.0);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w]() {
      double local = 0.0;
      for (std::size_t k = w; k < total; k += jobs) local = std::max(local, sample_value(k));
      part[w] = local;
    });
  }
  for (auto& t : workers) t.join();
  double sup = 0.0;
  for (double p : part) sup = std::max(sup, p);
  return sup;
}

inline void require_in_xv(const MapSystem& map, const Observable& v, const State& candidate,
                          std::size_t horizon) {
  double resid;
  try {
    resid = candidate_residual(map, v, candidate, horizon);
  } catch (const NonFiniteError&) {
    throw CandidateNotInXv(std::numeric_limits<double>::infinity());
  }
  if (resid > kXvResidualTol) throw CandidateNotInXv(resid);
}

}  // namespace detail

/// Sampled double supremum over the ball B_r(candidate): uniform-in-ball
/// samples plus deterministic probes along the coordinate axes and any
/// supplied unstable directions, each scaled to r/2.
/// Pre: the candidate's own orbit keeps |dv| <= 1e-10 over the horizon.
/// Equals the first entry of escape_profile with radii = {r} and the same seed.
inline double escape_supremum(const MapSystem& map, const Observable& v, const State& candidate,
                              double r, const SearchOptions& opt = {}) {
  detail::require_in_xv(map, v, candidate, opt.horizon);
  return detail::escape_supremum_impl(map, v, candidate, r, opt, derive_seed(opt.seed, 0));
}

/// Escape suprema over a list of radii (one X^v membership check up front).
inline EscapeProfile escape_profile(const MapSystem& map, const Observable& v,
                                    const State& candidate, const std::vector<double>& radii,
                                    const SearchOptions& opt = {}) {
  detail::require_in_xv(map, v, candidate, opt.horizon);
  EscapeProfile prof;
  prof.candidate = candidate;
  prof.radii = radii;
  prof.horizon = opt.horizon;
  prof.samples_per_radius = opt.samples;
  prof.seed = opt.seed;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    prof.escape_sup.push_back(detail::escape_supremum_impl(map, v, candidate, radii[ri], opt,
                                                           derive_seed(opt.seed, ri)));
  }
  return prof;
}

/// Empirical center evidence from an escape profile: the suprema must stay
/// above S* = half the largest-radius supremum and must not decay toward zero
/// (min/max >= 0.5). This is evidence, not proof; the verdict is flagged
/// empirical.
inline CenterVerdict empirical_center_verdict(const MapSystem& map, const Observable& v,
                                              const State& candidate,
                                              const std::vector<double>& radii,
                                              const SearchOptions& opt = {}) {
  const EscapeProfile prof = escape_profile(map, v, candidate, radii, opt);
  CenterVerdict verdict;
  verdict.criterion = Criterion::Empirical;
  verdict.empirical = true;
  if (prof.escape_sup.empty()) {
    verdict.applicable = false;
    verdict.note = "no radii given";
    return verdict;
  }
  std::size_t largest = 0;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] > radii[largest]) largest = i;
  }
  const double s_star = 0.5 * prof.escape_sup[largest];
  const double lo = *std::min_element(prof.escape_sup.begin(), prof.escape_sup.end());
  const double hi = *std::max_element(prof.escape_sup.begin(), prof.escape_sup.end());
  verdict.certificate["s_star"] = s_star;
  verdict.certificate["min_escape_sup"] = lo;
  verdict.certificate["max_escape_sup"] = hi;
  verdict.certificate["ratio"] = hi > 0.0 ? lo / hi : 0.0;
  if (hi > 0.0 && lo >= s_star && lo / hi >= 0.5) {
    verdict.decision = Decision::Center;
  } else {
    verdict.decision = Decision::Inconclusive;
    verdict.note = "escape suprema decay with radius";
  }
  return verdict;
}

struct TransientHit {
  State point;
  std::size_t time = 0;
};

/// Quasi-random scan of a region for (v,s,T)-transient points: Halton-sampled
/// starting states classified one by one, capped at `budget` samples. The seed
/// offsets the Halton index deterministically.
inline std::vector<TransientHit> transient_point_search(const MapSystem& map, const Observable& v,
                                                        const Box& region, double s, std::size_t T,
                                                        std::size_t horizon, std::size_t budget,
                                                        std::uint64_t seed) {
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  const std::size_t n = map.dim;
  auto halton = [](std::uint64_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * static_cast<double>(index % base);
      index /= base;
    }
    return r;
  };
  std::vector<TransientHit> hits;
  const std::uint64_t offset = (seed % 0x7fffffffULL) + 1;
  for (std::size_t k = 0; k < budget; ++k) {
    State x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = halton(offset + k, kPrimes[i % 8]);
      x[i] = region.lo[i] + u * (region.hi[i] - region.lo[i]);
    }
    TransientTimeResult res;
    if (classify_transient_point(map, v, x, s, T, horizon, &res) ==
        TransientPointClass::IsTransientPoint) {
      hits.push_back({std::move(x), res.time});
    }
  }
  return hits;
}

struct HoneymoonRow {
  double epsilon = 0.0;
  TransientTimeResult result;
};

/// Transient times along the ray candidate + eps * direction, one row per eps,
/// in the given order. Blow-ups are captured per row rather than aborting.
inline std::vector<HoneymoonRow> honeymoon_scaling(const MapSystem& map, const Observable& v,
                                                   const State& candidate, const State& direction,
                                                   const std::vector<double>& epsilons, double s,
                                                   std::size_t horizon) {
  std::vector<HoneymoonRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    State x = candidate;
    for (std::size_t i = 0; i < map.dim; ++i) x[i] += eps * direction[i];
    HoneymoonRow row;
    row.epsilon = eps;
    row.result = transient_time(map, v, x, s, horizon);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tscope
