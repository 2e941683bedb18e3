#include "otlab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace otlab {

double det(const Mat& a) {
  switch (a.dim) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      throw UnsupportedDimensionError("det: dimension must be 1..3");
  }
}

Mat inverse(const Mat& a) {
  const double d = det(a);
  double scale = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (std::abs(d) <= 1e-300 || std::abs(d) < 1e-15 * std::pow(std::max(scale, 1e-300), a.dim)) {
    throw SingularMatrixError("inverse: matrix is numerically singular");
  }
  Mat r(a.dim);
  switch (a.dim) {
    case 1:
      r(0, 0) = 1.0 / d;
      break;
    case 2:
      r(0, 0) = a(1, 1) / d;
      r(0, 1) = -a(0, 1) / d;
      r(1, 0) = -a(1, 0) / d;
      r(1, 1) = a(0, 0) / d;
      break;
    case 3:
      r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
      r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
      r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
      r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
      r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
      r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
      r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
      r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
      r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
      break;
    default:
      throw UnsupportedDimensionError("inverse: dimension must be 1..3");
  }
  return r;
}

double asymmetry(const Mat& a) {
  double r = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = i + 1; j < a.dim; ++j) r = std::max(r, std::abs(a(i, j) - a(j, i)));
  return r;
}

namespace {

double off_diag_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double hs(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymSpectrum sym_eigen(const Mat& a_in) {
  const int d = a_in.dim;
  if (d < 1 || d > kMaxDim) throw UnsupportedDimensionError("sym_eigen: dimension must be 1..3");
  Mat a = a_in;
  // Work on the symmetrized matrix; callers enforce their own asymmetry policy.
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  Mat q = Mat::identity(d);
  const double tol = 1e-13 * (1.0 + hs(a));
  for (int sweep = 0; sweep < 64 && off_diag_norm(a) > tol; ++sweep) {
    for (int p = 0; p < d - 1; ++p) {
      for (int r = p + 1; r < d; ++r) {
        const double apq = a(p, r);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (int k = 0; k < d; ++k) {
          const double qkp = q(k, p), qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }
  // Sort eigenvalues ascending, permuting eigenvector columns alongside.
  std::array<int, kMaxDim> idx{0, 1, 2};
  std::sort(idx.begin(), idx.begin() + d, [&](int i, int j) { return a(i, i) < a(j, j); });
  SymSpectrum out;
  out.eigenvalues = Vec(d);
  out.eigenvectors = Mat(d);
  for (int j = 0; j < d; ++j) {
    out.eigenvalues[j] = a(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(j)]);
    for (int i = 0; i < d; ++i) out.eigenvectors(i, j) = q(i, idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace otlab
