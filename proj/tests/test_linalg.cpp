#include <doctest.h>

#include <cmath>

#include "tscope/linalg.hpp"
#include "tscope/rng.hpp"
#include "tscope/zoo.hpp"

using namespace tscope;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

}  // namespace

TEST_CASE("jacobian: analytic values at the zoo fixed points") {
  const ZooModel pp = build("streipert_pp");  // r=0.5, K=1, alpha=1, gamma=4, d=1
  const Mat j0 = jacobian(pp.map, {0.0, 0.0});
  CHECK(j0(0, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(j0(0, 1) == 0.0);
  CHECK(j0(1, 0) == 0.0);
  CHECK(j0(1, 1) == doctest::Approx(0.5).epsilon(1e-14));

  const ZooModel ex2 = build("example2", {{"a", 1.5}, {"b", 1.3}});
  const Mat jo = jacobian(ex2.map, {0.0, 0.0});
  CHECK(jo(0, 0) == 0.0);
  CHECK(jo(0, 1) == 1.5);
  CHECK(jo(1, 0) == 1.3);
  CHECK(jo(1, 1) == 0.0);
}

TEST_CASE("jacobian: central differences recover a linear map") {
  Mat a = mat2(0.3, -1.2, 2.0, 0.7);
  MapSystem m = make_map(2, "lin", [a](const State& x, State& out) {
    out[0] = a(0, 0) * x[0] + a(0, 1) * x[1];
    out[1] = a(1, 0) * x[0] + a(1, 1) * x[1];
  });
  const Mat j = jacobian(m, {0.4, -0.9});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k) CHECK(j(i, k) == doctest::Approx(a(i, k)).epsilon(1e-9));
}

TEST_CASE("eigen_summary: worked spectra") {
  // lambda^2 = ab for [[0,a],[b,0]]; verified by substitution below.
  const Mat m = mat2(0.0, 1.5, 1.3, 0.0);
  const SpectralSummary sp = eigen_summary(m);
  REQUIRE(sp.eigenvalues.size() == 2);
  const double lam = std::sqrt(1.95);
  CHECK(sp.spectral_radius == doctest::Approx(lam).epsilon(1e-12));
  for (const auto& ev : sp.eigenvalues) {
    CHECK(std::fabs(ev.imag()) < 1e-12);
    CHECK(ev.real() * ev.real() == doctest::Approx(1.95).epsilon(1e-12));
  }
  REQUIRE(sp.real_eigenpairs.size() == 2);
  for (const auto& [lambda, w] : sp.real_eigenpairs) {
    // direct substitution: A w = lambda w
    CHECK(1.5 * w[1] == doctest::Approx(lambda * w[0]).epsilon(1e-10));
    CHECK(1.3 * w[0] == doctest::Approx(lambda * w[1]).epsilon(1e-10));
    CHECK(norm2(w) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const SpectralSummary id = eigen_summary(Mat::identity(2));
  CHECK(id.spectral_radius == doctest::Approx(1.0));
  CHECK(id.spectral_norm == doctest::Approx(1.0));

  const SpectralSummary diag = eigen_summary(mat2(1.5, 0.0, 0.0, 0.5));
  CHECK(diag.spectral_radius == doctest::Approx(1.5));
  bool found = false;
  for (const auto& [lambda, w] : diag.real_eigenpairs) {
    if (std::fabs(lambda - 1.5) < 1e-12) {
      found = true;
      CHECK(std::fabs(w[0]) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::fabs(w[1]) < 1e-12);
    }
  }
  CHECK(found);
}

TEST_CASE("eigen_summary: stored eigenpair residuals satisfy the contract") {
  Rng rng(31);
  for (int k = 0; k < 25; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 5);
    Mat m(n, n);
    for (double& v : m.a) v = rng.uniform(-2.0, 2.0);
    const SpectralSummary sp = eigen_summary(m);
    for (const auto& [lambda, w] : sp.real_eigenpairs) {
      State aw(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) aw[i] += m(i, j) * w[j];
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) r += (aw[i] - lambda * w[i]) * (aw[i] - lambda * w[i]);
      CHECK(std::sqrt(r) <= 1e-8 * sp.spectral_norm + 1e-14);
      CHECK(norm2(w) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("spectral_norm: worked values") {
  CHECK(spectral_norm(mat2(1.5, 0.0, 0.0, 0.5)) == doctest::Approx(1.5).epsilon(1e-12));
  // A^T A = diag(1.69, 2.25) by hand, so the norm is 1.5.
  CHECK(spectral_norm(mat2(0.0, 1.5, 1.3, 0.0)) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(spectral_norm(Mat(2, 2, 0.0)) == 0.0);
}

TEST_CASE("property: spectral radius never exceeds the spectral norm") {
  Rng rng(55);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 6);
    Mat m(n, n);
    for (double& v : m.a) v = rng.uniform(-3.0, 3.0);
    const SpectralSummary sp = eigen_summary(m);
    CHECK(sp.spectral_radius <= sp.spectral_norm * (1.0 + 1e-12) + 1e-14);
  }
}

TEST_CASE("gradient: analytic and finite-difference paths") {
  const Observable vx = linear_observable("x", {1.0, 0.0});
  const State g1 = gradient(vx, {3.0, -2.0});
  CHECK(g1[0] == 1.0);
  CHECK(g1[1] == 0.0);

  const Observable vsum = linear_observable("x+y", {1.0, 1.0});
  const State g2 = gradient(vsum, {0.2, 0.4});
  CHECK(g2[0] == 1.0);
  CHECK(g2[1] == 1.0);

  const Observable vsq = make_observable("xsq", [](const State& x) { return x[0] * x[0]; });
  const State g3 = gradient(vsq, {0.0});
  CHECK(std::fabs(g3[0]) < 1e-10);  // v'(0) = 0 via central differences
}

TEST_CASE("hessian_delta_v: worked values") {
  const ZooModel cub = build("cubic1d");
  const HessianResult h1 = hessian_delta_v(cub.map, cub.entry.observable("xsq"), {0.0});
  CHECK(h1.h(0, 0) == doctest::Approx(6.0).epsilon(1e-4));
  CHECK(h1.rel_asymmetry <= 1e-4);

  const ZooModel ex1 = build("example1", {{"h", 0.1}});
  const HessianResult h2 = hessian_delta_v(ex1.map, ex1.entry.observable("x"), {0.0, 0.0});
  CHECK(h2.h(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::fabs(h2.h(0, 1) + 0.1) < 1e-6);
  CHECK(std::fabs(h2.h(1, 0) + 0.1) < 1e-6);
  CHECK(h2.h(1, 1) == doctest::Approx(0.0).epsilon(1e-6));

  // Linear dv has a vanishing Hessian.
  MapSystem lin = make_map(2, "lin", [](const State& x, State& out) {
    out[0] = 2.0 * x[0];
    out[1] = 0.5 * x[1];
  });
  const HessianResult h3 = hessian_delta_v(lin, linear_observable("x", {1.0, 0.0}), {0.3, 0.4});
  CHECK(h3.h.max_abs() < 1e-6);
}

TEST_CASE("definiteness: worked verdicts") {
  Mat m1(1, 1);
  m1(0, 0) = 6.0;
  const DefinitenessVerdict d1 = definiteness(m1);
  CHECK(d1.kind == DefinitenessVerdict::Kind::PositiveDefinite);
  CHECK(d1.min_abs_eigenvalue == doctest::Approx(6.0));

  const DefinitenessVerdict d2 = definiteness(mat2(0.0, -0.1, -0.1, 0.0));
  CHECK(d2.kind == DefinitenessVerdict::Kind::Indefinite);  // eigenvalues are +/- 0.1
  CHECK(d2.min_abs_eigenvalue == doctest::Approx(0.1).epsilon(1e-12));

  CHECK(definiteness(Mat(2, 2, 0.0)).kind == DefinitenessVerdict::Kind::Degenerate);
  CHECK(definiteness(mat2(-2.0, 0.0, 0.0, -0.5)).kind ==
        DefinitenessVerdict::Kind::NegativeDefinite);
}

TEST_CASE("nonneg_irreducible: worked verdicts") {
  CHECK(nonneg_irreducible(mat2(0.0, 1.5, 1.3, 0.0)));
  CHECK_FALSE(nonneg_irreducible(Mat::identity(2)));          // reducible
  CHECK_FALSE(nonneg_irreducible(mat2(-1.0, 2.0, 2.0, 1.0)));  // negative entry

  // A 3-cycle permutation pattern is irreducible.
  Mat c(3, 3);
  c(0, 1) = 1.0;
  c(1, 2) = 1.0;
  c(2, 0) = 1.0;
  CHECK(nonneg_irreducible(c));
  // Break the cycle and it becomes reducible.
  c(2, 0) = 0.0;
  CHECK_FALSE(nonneg_irreducible(c));
}

TEST_CASE("property: Perron-Frobenius consistency of the eigen path") {
  Rng rng(77);
  for (int k = 0; k < 25; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 4);
    Mat m(n, n);
    for (double& v : m.a) v = rng.uniform(0.05, 2.0);  // strictly positive => irreducible
    REQUIRE(nonneg_irreducible(m));
    const SpectralSummary sp = eigen_summary(m);
    bool found = false;
    for (const auto& [lambda, w] : sp.real_eigenpairs) {
      if (std::fabs(lambda - sp.spectral_radius) > 1e-8 * (1.0 + sp.spectral_radius)) continue;
      found = true;
      double sum = 0.0;
      for (double c : w) sum += c;
      for (double c : w) CHECK(c * (sum >= 0.0 ? 1.0 : -1.0) > 0.0);
    }
    CHECK(found);
  }
}

TEST_CASE("dense path rejects unsupported shapes") {
  CHECK_THROWS_AS(eigen_summary(Mat(2, 3, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(eigen_summary(Mat(0, 0, 0.0)), std::invalid_argument);
  Mat huge(65, 65, 0.0);
  CHECK_THROWS_AS(eigen_summary(huge), std::invalid_argument);
  Mat bad(2, 2, 0.0);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(eigen_summary(bad), std::invalid_argument);
}
