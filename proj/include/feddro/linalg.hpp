#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace feddro {

using Vec = std::vector<double>;

// Row-major dense matrix, used for inner-map Jacobians (rows x cols = d_g x d).
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline void check_dim(const Vec& v, std::size_t d, const char* what) {
  if (v.size() != d) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// J^T v where J is (d_g x d); result has dimension d.
inline Vec jac_transpose_mul(const Mat& jac, const Vec& v) {
  if (v.size() != jac.rows) throw std::invalid_argument("jac_transpose_mul: dimension mismatch");
  Vec r(jac.cols, 0.0);
  for (std::size_t i = 0; i < jac.rows; ++i)
    for (std::size_t j = 0; j < jac.cols; ++j) r[j] += jac(i, j) * v[i];
  return r;
}

}  // namespace feddro
