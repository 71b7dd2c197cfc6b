/**
 * @file linalg.hpp
 * @brief Small dense spectral computations and numerical differentiation used
 *        by the fixed-point criteria: eigenpairs, spectral radius/norm,
 *        Jacobians, gradients, Hessians of dv, definiteness, irreducibility.
 *
 * The dense eigenproblems go through Eigen; everything else is hand-rolled.
 * Matrices here are tiny (n <= 64 by contract).
 */
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tscope/core.hpp"
#include "tscope/types.hpp"

namespace tscope {

struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kMaxDenseDim = 64;

/// Eigenstructure of a real square matrix. Real eigenpairs are extracted for
/// every eigenvalue with |Im| <= 1e-9 (1 + |lambda|); each stored eigenvector
/// w is unit norm with ||A w - lambda w|| <= 1e-8 ||A||.
struct SpectralSummary {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<std::pair<double, State>> real_eigenpairs;
  double spectral_radius = 0.0;
  double spectral_norm = 0.0;
};

struct DefinitenessVerdict {
  enum class Kind { PositiveDefinite, NegativeDefinite, Indefinite, Degenerate };
  Kind kind = Kind::Degenerate;
  double min_abs_eigenvalue = 0.0;
};

inline const char* to_string(DefinitenessVerdict::Kind k) {
  switch (k) {
    case DefinitenessVerdict::Kind::PositiveDefinite: return "PositiveDefinite";
    case DefinitenessVerdict::Kind::NegativeDefinite: return "NegativeDefinite";
    case DefinitenessVerdict::Kind::Indefinite: return "Indefinite";
    case DefinitenessVerdict::Kind::Degenerate: return "Degenerate";
  }
  return "?";
}

namespace detail {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline EMat to_eigen(const Mat& m) {
  return Eigen::Map<const EMat>(m.a.data(), static_cast<Eigen::Index>(m.rows),
                                static_cast<Eigen::Index>(m.cols));
}

inline void check_square_dense(const Mat& m) {
  if (m.rows != m.cols) throw std::invalid_argument("matrix must be square");
  if (m.rows == 0 || m.rows > kMaxDenseDim)
    throw std::invalid_argument("dense spectral path supports 1 <= n <= 64");
  for (double v : m.a) {
    if (!std::isfinite(v)) throw std::invalid_argument("matrix has non-finite entries");
  }
}

/// Largest eigenvalue of the symmetric PSD matrix A^T A, via the dense
/// self-adjoint path.
inline double rho_ata(const EMat& a) {
  const EMat ata = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<EMat> es(ata);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("spectral_norm: eigensolver failed");
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

}  // namespace detail

/// Operator 2-norm sqrt(rho(A^T A)).
inline double spectral_norm(const Mat& m) {
  detail::check_square_dense(m);
  return std::sqrt(detail::rho_ata(detail::to_eigen(m)));
}

inline SpectralSummary eigen_summary(const Mat& m) {
  detail::check_square_dense(m);
  const detail::EMat a = detail::to_eigen(m);
  const std::size_t n = m.rows;

  SpectralSummary out;
  out.spectral_norm = std::sqrt(detail::rho_ata(a));

  Eigen::EigenSolver<detail::EMat> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("eigen: QR iteration did not converge");

  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(static_cast<Eigen::Index>(i));
    out.eigenvalues.push_back(lam);
    out.spectral_radius = std::max(out.spectral_radius, std::abs(lam));
  }

  const double resid_tol = 1e-8 * std::max(out.spectral_norm, 1e-300);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(static_cast<Eigen::Index>(i));
    if (std::fabs(lam.imag()) > 1e-9 * (1.0 + std::abs(lam))) continue;
    // Rotate the complex eigenvector onto the real axis by the phase of its
    // largest component, then renormalize.
    Eigen::VectorXcd vc = es.eigenvectors().col(static_cast<Eigen::Index>(i));
    Eigen::Index imax = 0;
    vc.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> phase = vc(imax) / std::abs(vc(imax));
    Eigen::VectorXd w = (vc / phase).real();
    const double nrm = w.norm();
    if (!(nrm > 0.0)) continue;
    w /= nrm;
    const double resid = (a * w - lam.real() * w).norm();
    if (resid > resid_tol) continue;
    State wv(n);
    for (std::size_t k = 0; k < n; ++k) wv[k] = w(static_cast<Eigen::Index>(k));
    out.real_eigenpairs.emplace_back(lam.real(), std::move(wv));
  }
  return out;
}

namespace detail {

inline double fd_step(double base, double coord) { return base * std::max(1.0, std::fabs(coord)); }

}  // namespace detail

constexpr double kDefaultGradStep = 1e-6;
constexpr double kDefaultHessStep = 1e-4;

/// Jacobian of the map at x: analytic when provided, otherwise central
/// differences column by column with per-coordinate step h_i = step*max(1,|x_i|).
inline Mat jacobian(const MapSystem& map, const State& x, double step = kDefaultGradStep) {
  const std::size_t n = map.dim;
  Mat j(n, n);
  if (map.has_jacobian()) {
    map.jac(x, j);
    return j;
  }
  State xp = x, xm = x, fp(n), fm(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double h = detail::fd_step(step, x[c]);
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    if (!map.domain.contains(xp) || !map.domain.contains(xm))
      throw NonFiniteError("jacobian: finite-difference probe left the domain");
    map.eval(xp, fp);
    map.eval(xm, fm);
    if (!all_finite(fp) || !all_finite(fm))
      throw NonFiniteError("jacobian: map evaluation failed at probe");
    for (std::size_t r = 0; r < n; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return j;
}

/// Gradient of the observable at x: analytic when provided, else central
/// differences with the same stepping rule as the Jacobian.
inline State gradient(const Observable& v, const State& x, double step = kDefaultGradStep) {
  const std::size_t n = x.size();
  State g(n);
  if (v.has_gradient()) {
    v.grad(x, g);
    return g;
  }
  State xp = x, xm = x;
  for (std::size_t c = 0; c < n; ++c) {
    const double h = detail::fd_step(step, x[c]);
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    const double fp = v.eval(xp), fm = v.eval(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteError("gradient: observable evaluation failed at probe");
    g[c] = (fp - fm) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return g;
}

/// Gradient of the scalar field x -> dv(x) = v(f(x)) - v(x), central differences.
inline State gradient_delta_v(const MapSystem& map, const Observable& v, const State& x,
                              double step = kDefaultGradStep) {
  const std::size_t n = x.size();
  State g(n), xp = x, xm = x;
  for (std::size_t c = 0; c < n; ++c) {
    const double h = detail::fd_step(step, x[c]);
    xp[c] = x[c] + h;
    xm[c] = x[c] - h;
    g[c] = (delta_v(map, v, xp) - delta_v(map, v, xm)) / (2.0 * h);
    xp[c] = x[c];
    xm[c] = x[c];
  }
  return g;
}

struct HessianResult {
  Mat h;                      // symmetrized (H + H^T)/2
  double rel_asymmetry = 0.0; // max |H - H^T| / max(1, max |H|) before symmetrizing
};

/// Second-order central-difference Hessian of x -> dv(x), symmetrized.
/// Off-diagonal entries are evaluated in both index orders; the relative
/// asymmetry before symmetrization is reported so callers can flag
/// non-smooth or noisy inputs (threshold 1e-4 by convention).
inline HessianResult hessian_delta_v(const MapSystem& map, const Observable& v, const State& x,
                                     double step = kDefaultHessStep) {
  const std::size_t n = x.size();
  auto phi = [&](const State& p) { return delta_v(map, v, p); };
  Mat h(n, n);
  const double phi0 = phi(x);
  State p = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = detail::fd_step(step, x[i]);
    p[i] = x[i] + hi;
    const double fp = phi(p);
    p[i] = x[i] - hi;
    const double fm = phi(p);
    p[i] = x[i];
    h(i, i) = (fp - 2.0 * phi0 + fm) / (hi * hi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double hi = detail::fd_step(step, x[i]);
      const double hj = detail::fd_step(step, x[j]);
      p[i] = x[i] + hi; p[j] = x[j] + hj; const double fpp = phi(p);
      p[j] = x[j] - hj; const double fpm = phi(p);
      p[i] = x[i] - hi; p[j] = x[j] + hj; const double fmp = phi(p);
      p[j] = x[j] - hj; const double fmm = phi(p);
      p[i] = x[i]; p[j] = x[j];
      h(i, j) = ((fpp - fpm) - (fmp - fmm)) / (4.0 * hi * hj);
    }
  }
  HessianResult out;
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::fabs(h(i, j) - h(j, i)));
  out.rel_asymmetry = asym / std::max(1.0, h.max_abs());
  out.h = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.h(i, j) = 0.5 * (h(i, j) + h(j, i));
  return out;
}

/// Classifies a symmetric matrix by the signs of its eigenvalues. Eigenvalues
/// with |lambda_i| <= tol * max|lambda_j| count as degenerate.
inline DefinitenessVerdict definiteness(const Mat& m, double tol = 1e-6) {
  detail::check_square_dense(m);
  Eigen::SelfAdjointEigenSolver<detail::EMat> es(detail::to_eigen(m));
  if (es.info() != Eigen::Success) throw ConvergenceFailure("definiteness: eigensolver failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  DefinitenessVerdict out;
  const double lmax = ev.cwiseAbs().maxCoeff();
  out.min_abs_eigenvalue = ev.cwiseAbs().minCoeff();
  if (lmax == 0.0 || out.min_abs_eigenvalue <= tol * lmax) {
    out.kind = DefinitenessVerdict::Kind::Degenerate;
    return out;
  }
  const bool all_pos = (ev.array() > 0.0).all();
  const bool all_neg = (ev.array() < 0.0).all();
  out.kind = all_pos   ? DefinitenessVerdict::Kind::PositiveDefinite
             : all_neg ? DefinitenessVerdict::Kind::NegativeDefinite
                       : DefinitenessVerdict::Kind::Indefinite;
  return out;
}

/// True iff all entries of A are >= 0 and (I + A)^(n-1) is entrywise positive.
/// Computed in boolean arithmetic on the sparsity pattern, so it cannot
/// overflow. Rows are packed into 64-bit masks (n <= 64).
inline bool nonneg_irreducible(const Mat& m) {
  detail::check_square_dense(m);
  const std::size_t n = m.rows;
  for (double v : m.a) {
    if (v < 0.0) return false;
  }
  std::vector<std::uint64_t> b(n, 0);  // pattern of I + A
  for (std::size_t i = 0; i < n; ++i) {
    b[i] |= (std::uint64_t{1} << i);
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) > 0.0) b[i] |= (std::uint64_t{1} << j);
    }
  }
  std::vector<std::uint64_t> acc = b, tmp(n, 0);
  for (std::size_t pw = 1; pw + 1 < n; ++pw) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t row = 0;
      std::uint64_t r = acc[i];
      while (r) {
        const unsigned k = static_cast<unsigned>(__builtin_ctzll(r));
        row |= b[k];
        r &= r - 1;
      }
      tmp[i] = row;
    }
    acc.swap(tmp);
  }
  const std::uint64_t full = (n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if ((acc[i] & full) != full) return false;
  }
  return true;
}

}  // namespace tscope
