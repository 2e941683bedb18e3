#pragma once

#include <array>
#include <cmath>
#include <initializer_list>

#include "otlab/errors.hpp"

namespace otlab {

inline constexpr int kMaxDim = 3;

//! Dense vector in R^d, d <= 3. The dimension is carried at runtime.
struct Vec {
  int dim = 0;
  std::array<double, kMaxDim> c{0.0, 0.0, 0.0};

  Vec() = default;
  explicit Vec(int d) : dim(d) {}
  Vec(std::initializer_list<double> xs) {
    dim = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) c[i++] = x;
  }

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
};

//! Dense square matrix in R^{dxd}, d <= 3, row-major.
struct Mat {
  int dim = 0;
  std::array<double, kMaxDim * kMaxDim> m{};

  Mat() = default;
  explicit Mat(int d) : dim(d) { m.fill(0.0); }

  double& operator()(int i, int j) { return m[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return m[static_cast<std::size_t>(i * kMaxDim + j)]; }

  static Mat identity(int d) {
    Mat a(d);
    for (int i = 0; i < d; ++i) a(i, i) = 1.0;
    return a;
  }
  static Mat diag(std::initializer_list<double> xs) {
    Mat a(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) {
      a(i, i) = x;
      ++i;
    }
    return a;
  }
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec operator*(double s, const Vec& a) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) r[i] = s * a[i];
  return r;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Mat operator+(const Mat& a, const Mat& b) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}
inline Mat operator-(const Mat& a, const Mat& b) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}
inline Mat operator*(double s, const Mat& a) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) r(i, j) = s * a(i, j);
  return r;
}
inline Mat operator*(const Mat& a, const Mat& b) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < a.dim; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}
inline Vec operator*(const Mat& a, const Vec& x) {
  Vec r(a.dim);
  for (int i = 0; i < a.dim; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.dim; ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}
inline Mat transpose(const Mat& a) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) r(i, j) = a(j, i);
  return r;
}
inline Mat outer(const Vec& a, const Vec& b) {
  Mat r(a.dim);
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) r(i, j) = a[i] * b[j];
  return r;
}
inline double trace(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a(i, i);
  return s;
}

double det(const Mat& a);
Mat inverse(const Mat& a);  // throws SingularMatrixError

//! Largest absolute off-diagonal deviation from symmetry.
double asymmetry(const Mat& a);

//! Eigendecomposition of a symmetric matrix: A = Q diag(lambda) Q^T with
//! eigenvalues sorted ascending and Q orthonormal (columns are eigenvectors).
struct SymSpectrum {
  Vec eigenvalues;
  Mat eigenvectors;
};

//! Cyclic Jacobi rotations, off-diagonal tolerance 1e-13 relative.
SymSpectrum sym_eigen(const Mat& a);

}  // namespace otlab
