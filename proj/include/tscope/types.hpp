/**
 * @file types.hpp
 * @brief Basic value types shared across the library: states, small dense
 *        matrices, domain boxes and the numeric-failure error.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tscope {

using State = std::vector<double>;

/// Small dense row-major matrix. Dimensions here never exceed a few dozen.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat transposed() const {
    Mat t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
  }
};

/// Axis-aligned domain box. Maps are only iterated while the state stays inside.
struct Box {
  State lo;
  State hi;

  static Box centered(std::size_t n, double half_width) {
    Box b;
    b.lo.assign(n, -half_width);
    b.hi.assign(n, half_width);
    return b;
  }

  bool contains(const State& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    }
    return true;
  }

  std::size_t dim() const { return lo.size(); }
};

inline bool all_finite(const State& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline double norm2(const State& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(const State& a, const State& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Raised when an evaluation produces NaN/Inf or a probe leaves the domain box.
struct NonFiniteError : std::runtime_error {
  std::size_t step;
  explicit NonFiniteError(const std::string& what, std::size_t step_index = 0)
      : std::runtime_error(what), step(step_index) {}
};

}  // namespace tscope
