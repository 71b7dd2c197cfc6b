/**
 * @file criteria.hpp
 * @brief Fixed-point location and the mechanical transient-center criteria:
 *        stability exclusion, the unstable-eigenvector gradient tests with the
 *        spectral dominance conditions, the nonnegative-irreducible special
 *        case, the flat-gradient Hessian test, and the orchestrating
 *        classifier with its empirical fallback.
 *
 * Strict analytic inequalities become numeric predicates with a relative
 * margin of 1e-6; anything below margin is Inconclusive, never a guess. The
 * only negative criterion is stability exclusion.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tscope/core.hpp"
#include "tscope/linalg.hpp"
#include "tscope/search.hpp"
#include "tscope/verdict.hpp"

namespace tscope {

constexpr double kCriteriaMargin = 1e-6;
constexpr double kDotTol = 1e-9;

enum class Stability { Stable, Unstable, Marginal };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
  }
  return "?";
}

/// A located fixed point with its linearization. residual = ||f(x*) - x*||.
struct FixedPoint {
  State location;
  double residual = 0.0;
  Stability stability = Stability::Marginal;
  Mat jacobian;
  SpectralSummary spectral;
};

inline Stability stability_from_radius(double rho, double tol = kCriteriaMargin) {
  if (rho < 1.0 - tol) return Stability::Stable;
  if (rho > 1.0 + tol) return Stability::Unstable;
  return Stability::Marginal;
}

/// Builds the FixedPoint record (Jacobian, spectrum, stability) at a location
/// already known to satisfy f(x) ~ x.
inline FixedPoint analyze_fixed_point(const MapSystem& map, const State& location) {
  FixedPoint fp;
  fp.location = location;
  State fx = map.step(location);
  double r2 = 0.0;
  for (std::size_t i = 0; i < map.dim; ++i) r2 += (fx[i] - location[i]) * (fx[i] - location[i]);
  fp.residual = std::sqrt(r2);
  fp.jacobian = jacobian(map, location);
  fp.spectral = eigen_summary(fp.jacobian);
  fp.stability = stability_from_radius(fp.spectral.spectral_radius);
  return fp;
}

struct FixedPointSearch {
  std::vector<FixedPoint> points;
  std::size_t seeds_tried = 0;
  std::size_t seeds_converged = 0;
};

/// Newton iterations on g(x) = f(x) - x seeded at the nodes of a rectangular
/// grid over `region`. Converged roots are deduplicated within 1e-6 and
/// returned with stability and spectrum; seeds that fail to converge within
/// 50 iterations are dropped (counted in the diagnostics).
inline FixedPointSearch find_fixed_points(const MapSystem& map, const Box& region,
                                          const std::vector<std::size_t>& grid,
                                          double tol = 1e-9) {
  const std::size_t n = map.dim;
  FixedPointSearch out;

  std::vector<std::size_t> counts = grid;
  counts.resize(n, 2);
  for (auto& c : counts) c = std::max<std::size_t>(c, 2);

  std::size_t total = 1;
  for (std::size_t c : counts) total *= c;

  std::vector<State> roots;
  State seed(n), x(n), fx(n), gx(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = rem % counts[i];
      rem /= counts[i];
      seed[i] = region.lo[i] +
                (region.hi[i] - region.lo[i]) * static_cast<double>(k) /
                    static_cast<double>(counts[i] - 1);
    }
    ++out.seeds_tried;

    x = seed;
    bool converged = false;
    State best(n);
    double best_gnorm = std::numeric_limits<double>::infinity();
    int polish = 2;  // keep refining briefly after the tolerance is met
    for (int it = 0; it < 50; ++it) {
      if (!all_finite(x) || !map.domain.contains(x)) break;
      map.eval(x, fx);
      if (!all_finite(fx)) break;
      double gnorm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        gx[i] = fx[i] - x[i];
        gnorm += gx[i] * gx[i];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm <= tol * (1.0 + norm2(x))) {
        // Keep the best verified iterate; a polish step near a singular
        // Df - I must not be able to degrade the accepted root.
        if (!converged || gnorm < best_gnorm) {
          converged = true;
          best = x;
          best_gnorm = gnorm;
        }
        if (gnorm == 0.0 || polish-- <= 0) break;
      }
      Mat j;
      try {
        j = jacobian(map, x);
      } catch (const NonFiniteError&) {
        break;
      }
      for (std::size_t i = 0; i < n; ++i) j(i, i) -= 1.0;  // D(f - id)
      Eigen::Map<const detail::EMat> je(j.a.data(), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(n));
      Eigen::Map<const Eigen::VectorXd> ge(gx.data(), static_cast<Eigen::Index>(n));
      Eigen::VectorXd dx = je.fullPivLu().solve(-ge);
      if (!dx.allFinite()) break;
      for (std::size_t i = 0; i < n; ++i) x[i] += dx(static_cast<Eigen::Index>(i));
    }
    if (!converged) continue;
    x = best;

    // Keep roots in (a slightly inflated) search region only.
    bool inside = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double pad = 1e-9 + 1e-3 * (region.hi[i] - region.lo[i]);
      if (x[i] < region.lo[i] - pad || x[i] > region.hi[i] + pad) inside = false;
    }
    if (!inside) continue;
    ++out.seeds_converged;

    bool duplicate = false;
    for (const State& r : roots) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - r[i]) * (x[i] - r[i]);
      if (std::sqrt(d2) <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    roots.push_back(x);
  }

  std::sort(roots.begin(), roots.end());
  for (const State& r : roots) out.points.push_back(analyze_fixed_point(map, r));
  return out;
}

/// A Lyapunov stable fixed point cannot be a transient center for any
/// observable; rho < 1 certifies asymptotic (hence Lyapunov) stability.
/// rho = 1 certifies nothing and stays Inconclusive.
inline CenterVerdict stable_exclusion(const FixedPoint& fp) {
  CenterVerdict v;
  v.criterion = Criterion::StableExclusion;
  v.certificate["rho"] = fp.spectral.spectral_radius;
  if (fp.stability == Stability::Stable) {
    v.decision = Decision::NotCenter;
    v.certificate["margin"] = 1.0 - fp.spectral.spectral_radius;
    v.note = "asymptotically stable: not a center for any observable";
  } else {
    v.decision = Decision::Inconclusive;
  }
  return v;
}

enum class GradientEigvecMode { LinearMap, H1, H2 };

inline const char* to_string(GradientEigvecMode m) {
  switch (m) {
    case GradientEigvecMode::LinearMap: return "LinearMap";
    case GradientEigvecMode::H1: return "H1";
    case GradientEigvecMode::H2: return "H2";
  }
  return "?";
}

/// Searches real eigenpairs (lambda, w) of Df(x*) with |lambda| > 1 and tests
/// grad v(x*) . w != 0 together with the mode's dominance condition:
///   LinearMap: none (the map must be declared linear),
///   H1: lambda^2 > ||A||  (spectral norm),
///   H2: lambda^2 > rho(A) (holds automatically when |lambda| = rho > 1).
/// All strict inequalities require relative margin > 1e-6.
inline CenterVerdict gradient_eigvec_criterion(const FixedPoint& fp, const Observable& v,
                                               GradientEigvecMode mode,
                                               bool map_is_linear = false) {
  const Criterion crit = mode == GradientEigvecMode::LinearMap ? Criterion::GradientEigvecLinear
                         : mode == GradientEigvecMode::H1      ? Criterion::GradientEigvecH1
                                                               : Criterion::GradientEigvecH2;
  if (mode == GradientEigvecMode::LinearMap && !map_is_linear)
    return not_applicable(crit, "map not declared linear");

  const double rho = fp.spectral.spectral_radius;
  const double nrm = fp.spectral.spectral_norm;
  const State grad_v = gradient(v, fp.location);

  CenterVerdict best;
  best.criterion = crit;
  best.certificate["rho"] = rho;
  best.certificate["spectral_norm"] = nrm;

  bool any_unstable_real = false;
  for (const auto& [lambda, w] : fp.spectral.real_eigenpairs) {
    const double mag = std::fabs(lambda);
    if (mag <= 1.0 + kCriteriaMargin) continue;
    any_unstable_real = true;

    const double dvw = dot(grad_v, w);
    double margin = 0.0;
    bool dominance = true;
    if (mode == GradientEigvecMode::H1) {
      margin = (lambda * lambda - nrm) / std::max(nrm, 1e-300);
      dominance = margin > kCriteriaMargin;
    } else if (mode == GradientEigvecMode::H2) {
      margin = (lambda * lambda - rho) / std::max(rho, 1e-300);
      dominance = margin > kCriteriaMargin;
    }

    if (dominance && std::fabs(dvw) > kDotTol) {
      best.decision = Decision::Center;
      best.certificate["lambda"] = lambda;
      best.certificate["grad_dot_w"] = dvw;
      if (mode != GradientEigvecMode::LinearMap) best.certificate["margin"] = margin;
      return best;
    }
    // Remember the closest miss for the certificate.
    if (best.certificate.find("lambda") == best.certificate.end()) {
      best.certificate["lambda"] = lambda;
      best.certificate["grad_dot_w"] = dvw;
      if (mode != GradientEigvecMode::LinearMap) best.certificate["margin"] = margin;
    }
  }
  if (!any_unstable_real) return not_applicable(crit, "no real eigenvalue with |lambda| > 1");
  best.decision = Decision::Inconclusive;
  return best;
}

/// Nonnegative irreducible linearization with rho > 1 and a linear observable
/// with nonnegative coefficients: the Perron eigenpair settles it.
inline CenterVerdict perron_frobenius_criterion(const FixedPoint& fp, const State& p_vec) {
  CenterVerdict v;
  v.criterion = Criterion::PerronFrobenius;
  const std::size_t n = fp.jacobian.rows;
  if (n < 2) return not_applicable(Criterion::PerronFrobenius, "requires n >= 2");
  bool p_ok = false;
  for (double c : p_vec) {
    if (c < 0.0) return not_applicable(Criterion::PerronFrobenius, "observable has negative coefficients");
    if (c > 0.0) p_ok = true;
  }
  if (!p_ok) return not_applicable(Criterion::PerronFrobenius, "observable coefficients all zero");
  if (!nonneg_irreducible(fp.jacobian))
    return not_applicable(Criterion::PerronFrobenius, "Jacobian not nonnegative irreducible");

  const double rho = fp.spectral.spectral_radius;
  v.certificate["rho"] = rho;
  if (rho <= 1.0 + kCriteriaMargin) {
    v.decision = Decision::Inconclusive;
    v.note = "spectral radius not above 1";
    return v;
  }
  // Perron vector: the real eigenpair at lambda = rho, sign-fixed positive.
  for (const auto& [lambda, w] : fp.spectral.real_eigenpairs) {
    if (std::fabs(lambda - rho) > 1e-8 * (1.0 + rho)) continue;
    State pw = w;
    double s = 0.0;
    for (double c : pw) s += c;
    if (s < 0.0) {
      for (double& c : pw) c = -c;
    }
    bool positive = true;
    for (double c : pw) positive = positive && c > 0.0;
    if (!positive) continue;
    v.decision = Decision::Center;
    v.certificate["margin"] = (rho - 1.0);
    for (std::size_t i = 0; i < n; ++i) v.certificate["perron_w" + std::to_string(i)] = pw[i];
    return v;
  }
  v.decision = Decision::Inconclusive;
  v.note = "Perron eigenpair not resolved";
  return v;
}

/// The second-order fallback for grad v(x*) = 0: unstable fixed point with
/// grad dv(x*) = 0 and definite Hessian of dv.
inline CenterVerdict flatness_criterion(const MapSystem& map, const FixedPoint& fp,
                                        const Observable& v) try {
  if (fp.stability != Stability::Unstable)
    return not_applicable(Criterion::HessianFlatness, "fixed point not certified unstable");
  CenterVerdict out;
  out.criterion = Criterion::HessianFlatness;

  const State g = gradient_delta_v(map, v, fp.location);
  const double gscale = 1.0 + norm2(gradient(v, fp.location));
  out.certificate["grad_delta_v_norm"] = norm2(g);
  if (norm2(g) > 1e-7 * gscale) {
    out.decision = Decision::Inconclusive;
    out.note = "grad dv(x*) is not numerically zero";
    return out;
  }

  const HessianResult hr = hessian_delta_v(map, v, fp.location);
  out.certificate["hessian_asymmetry"] = hr.rel_asymmetry;
  DefinitenessVerdict def;
  if (hr.rel_asymmetry > 1e-4) {
    def.kind = DefinitenessVerdict::Kind::Degenerate;
  } else {
    def = definiteness(hr.h);
  }
  out.certificate["hessian_min_abs_eigenvalue"] = def.min_abs_eigenvalue;
  for (std::size_t i = 0; i < hr.h.rows; ++i)
    for (std::size_t j = i; j < hr.h.cols; ++j)
      out.certificate["hessian_" + std::to_string(i) + std::to_string(j)] = hr.h(i, j);

  if (def.kind == DefinitenessVerdict::Kind::PositiveDefinite ||
      def.kind == DefinitenessVerdict::Kind::NegativeDefinite) {
    out.decision = Decision::Center;
  } else {
    out.decision = Decision::Inconclusive;
    out.note = std::string("Hessian of dv is ") + to_string(def.kind);
  }
  return out;
} catch (const NonFiniteError& e) {
  // Differencing dv needs probes of f around x*; a fixed point on the domain
  // boundary cannot be probed on all sides.
  return not_applicable(Criterion::HessianFlatness, e.what());
}

/// For declared-linear maps: builds the unstable eigenspace from the
/// eigenvectors with |lambda| > 1 (real vectors plus real/imaginary parts of
/// complex pairs) and samples dv on it at unit norm: the basis vectors, their
/// signed sums, and seeded random combinations. Any |dv(w)| > 1e-9 certifies.
inline CenterVerdict linear_eigenspace_criterion(const MapSystem& map, const Observable& v,
                                                 std::size_t samples = 64,
                                                 std::uint64_t seed = 0) {
  if (!map.linear)
    return not_applicable(Criterion::LinearEigenspace, "map not declared linear");
  const std::size_t n = map.dim;
  const State origin(n, 0.0);
  const Mat a = jacobian(map, origin);
  const SpectralSummary sp = eigen_summary(a);

  Eigen::EigenSolver<detail::EMat> es(detail::to_eigen(a), true);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("eigen: QR iteration did not converge");
  std::vector<State> basis;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(static_cast<Eigen::Index>(i));
    if (std::abs(lam) <= 1.0 + kCriteriaMargin) continue;
    if (lam.imag() < 0.0) continue;  // one representative per conjugate pair
    const Eigen::VectorXcd vc = es.eigenvectors().col(static_cast<Eigen::Index>(i));
    for (bool imag_part : {false, true}) {
      if (imag_part && std::fabs(lam.imag()) <= 1e-9 * (1.0 + std::abs(lam))) continue;
      State w(n);
      double nrm = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto c = vc(static_cast<Eigen::Index>(k));
        w[k] = imag_part ? c.imag() : c.real();
        nrm += w[k] * w[k];
      }
      nrm = std::sqrt(nrm);
      if (nrm <= 1e-12) continue;
      for (double& c : w) c /= nrm;
      basis.push_back(std::move(w));
    }
  }
  if (basis.empty())
    return not_applicable(Criterion::LinearEigenspace, "unstable eigenspace is trivial");

  CenterVerdict out;
  out.criterion = Criterion::LinearEigenspace;
  out.certificate["rho"] = sp.spectral_radius;
  out.certificate["eu_dim"] = static_cast<double>(basis.size());

  auto test_point = [&](const State& w) -> bool {
    const double dv = v.eval(map.step(w)) - v.eval(w);
    if (std::fabs(dv) > kDotTol) {
      out.decision = Decision::Center;
      out.certificate["delta_v_w"] = dv;
      return true;
    }
    return false;
  };

  for (const State& b : basis) {
    State nb(n);
    for (std::size_t i = 0; i < n; ++i) nb[i] = -b[i];
    if (test_point(b) || test_point(nb)) return out;
  }
  State sum(n, 0.0);
  for (const State& b : basis)
    for (std::size_t i = 0; i < n; ++i) sum[i] += b[i];
  const double snrm = norm2(sum);
  if (snrm > 1e-12) {
    State plus(n), minus(n);
    for (std::size_t i = 0; i < n; ++i) {
      plus[i] = sum[i] / snrm;
      minus[i] = -plus[i];
    }
    if (test_point(plus) || test_point(minus)) return out;
  }
  Rng rng(derive_seed(seed, 0xE16));
  for (std::size_t k = 0; k < samples; ++k) {
    State w(n, 0.0);
    for (const State& b : basis) {
      const double c = rng.normal();
      for (std::size_t i = 0; i < n; ++i) w[i] += c * b[i];
    }
    const double nrm = norm2(w);
    if (nrm <= 1e-12) continue;
    for (double& c : w) c /= nrm;
    if (test_point(w)) return out;
  }
  out.decision = Decision::Inconclusive;
  out.note = "dv vanished on all sampled unstable-eigenspace points";
  return out;
}

struct ClassifyOptions {
  bool use_empirical = true;
  std::vector<double> empirical_radii = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  SearchOptions search;
};

/// Applies the criteria in order and returns the first conclusive verdict:
/// stability exclusion, then (for declared-linear maps) the linear gradient
/// route, then Perron-Frobenius for nonnegative linear observables, then H2
/// before H1 (H2 is the weaker hypothesis when lambda is dominant), then the
/// Hessian flatness test, then the empirical fallback. When everything is
/// inconclusive the verdict carries all collected certificates.
inline CenterVerdict classify(const MapSystem& map, const FixedPoint& fp, const Observable& v,
                              const ClassifyOptions& opt = {}) {
  std::vector<CenterVerdict> attempts;
  auto finish = [&](CenterVerdict verdict) {
    for (const CenterVerdict& a : attempts) {
      if (a.criterion == verdict.criterion) continue;  // already carried unprefixed
      const std::string prefix = std::string(to_string(a.criterion)) + ".";
      for (const auto& [k, val] : a.certificate) verdict.certificate[prefix + k] = val;
    }
    return verdict;
  };
  auto attempt = [&](CenterVerdict cand) -> bool {
    attempts.push_back(cand);
    return cand.applicable && cand.decision != Decision::Inconclusive;
  };

  if (attempt(stable_exclusion(fp))) return finish(attempts.back());

  if (v.linear_coeffs && attempt(perron_frobenius_criterion(fp, *v.linear_coeffs)))
    return finish(attempts.back());

  if (map.linear &&
      attempt(gradient_eigvec_criterion(fp, v, GradientEigvecMode::LinearMap, true)))
    return finish(attempts.back());

  if (attempt(gradient_eigvec_criterion(fp, v, GradientEigvecMode::H2, map.linear)))
    return finish(attempts.back());
  if (attempt(gradient_eigvec_criterion(fp, v, GradientEigvecMode::H1, map.linear)))
    return finish(attempts.back());

  if (attempt(flatness_criterion(map, fp, v))) return finish(attempts.back());

  if (opt.use_empirical) {
    SearchOptions sopt = opt.search;
    for (const auto& [lambda, w] : fp.spectral.real_eigenpairs) {
      if (std::fabs(lambda) > 1.0) sopt.extra_directions.push_back(w);
    }
    try {
      if (attempt(empirical_center_verdict(map, v, fp.location, opt.empirical_radii, sopt)))
        return finish(attempts.back());
    } catch (const CandidateNotInXv& e) {
      CenterVerdict failed = not_applicable(Criterion::Empirical, e.what());
      attempts.push_back(failed);
    }
  }

  CenterVerdict out;
  out.decision = Decision::Inconclusive;
  out.criterion = Criterion::None;
  out.note = "no criterion was conclusive";
  return finish(out);
}

}  // namespace tscope
