#include "otlab/calculus.hpp"

#include <cmath>

#include "otlab/transport.hpp"

namespace otlab {

double hs_norm(const Mat& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double op_norm(const Mat& a) {
  if (asymmetry(a) > 1e-12) throw AsymmetryError("op_norm: input is not symmetric");
  const SymSpectrum s = sym_eigen(a);
  return std::max(std::abs(s.eigenvalues[0]), std::abs(s.eigenvalues[a.dim - 1]));
}

double spectral_norm(const Mat& a) {
  const SymSpectrum s = sym_eigen(transpose(a) * a);
  return std::sqrt(std::max(0.0, s.eigenvalues[a.dim - 1]));
}

Mat positive_part(const Mat& a) {
  if (asymmetry(a) > 1e-12) throw AsymmetryError("positive_part: input is not symmetric");
  const SymSpectrum s = sym_eigen(a);
  Mat r(a.dim);
  for (int k = 0; k < a.dim; ++k) {
    const double lam = std::max(s.eigenvalues[k], 0.0);
    if (lam == 0.0) continue;
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.dim; ++j)
        r(i, j) += lam * s.eigenvectors(i, k) * s.eigenvectors(j, k);
  }
  return r;
}

double log_det2_fredholm(const Mat& a, int d) {
  if (a.dim != d) throw InvalidArgumentError("det2_fredholm: dimension mismatch");
  if (asymmetry(a) > 1e-12) throw AsymmetryError("det2_fredholm: input is not symmetric");
  const SymSpectrum s = sym_eigen(a);
  if (s.eigenvalues[0] <= 0.0)
    throw SingularMatrixError("det2_fredholm: matrix must be positive definite");
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += std::log(s.eigenvalues[i]) + 1.0 - s.eigenvalues[i];
  return acc;
}

double det2_fredholm(const Mat& a, int d) { return std::exp(log_det2_fredholm(a, d)); }

namespace {

Mat sym_power(const Mat& a, double expo, const char* who) {
  if (asymmetry(a) > 1e-12) throw AsymmetryError(std::string(who) + ": input is not symmetric");
  const SymSpectrum s = sym_eigen(a);
  if (s.eigenvalues[0] <= 1e-12)
    throw SingularMatrixError(std::string(who) + ": matrix is numerically singular");
  Mat r(a.dim);
  for (int k = 0; k < a.dim; ++k) {
    const double lam = std::pow(s.eigenvalues[k], expo);
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.dim; ++j)
        r(i, j) += lam * s.eigenvectors(i, k) * s.eigenvectors(j, k);
  }
  return r;
}

}  // namespace

Mat matrix_sqrt(const Mat& a) { return sym_power(a, 0.5, "matrix_sqrt"); }
Mat matrix_inv_sqrt(const Mat& a) { return sym_power(a, -0.5, "matrix_inv_sqrt"); }

double fisher_information(const ProbabilityMeasure& mu, const QuadratureRule& rule) {
  return integrate(
      [&mu](const Vec& x) { return norm2(mu.potential.gradient(x)) * mu.density(x); }, rule);
}

double relative_fisher(const RelativeDensity& g, const ProbabilityMeasure& nu,
                       const QuadratureRule& rule) {
  // |grad g|^2/g dnu = |grad log g|^2 exp(log g - V_nu) dx, overflow-free.
  return integrate(
      [&](const Vec& x) {
        const double lg = g.log_value(x);
        if (!std::isfinite(lg)) throw UnderflowError("relative_fisher: degenerate density");
        return norm2(g.grad_log(x)) * std::exp(lg - nu.potential.value(x));
      },
      rule);
}

double relative_entropy(const RelativeDensity& g, const ProbabilityMeasure& nu,
                        const QuadratureRule& rule) {
  return integrate(
      [&](const Vec& x) {
        const double lg = g.log_value(x);
        if (!std::isfinite(lg)) throw UnderflowError("relative_entropy: degenerate density");
        return lg * std::exp(lg - nu.potential.value(x));
      },
      rule);
}

double wasserstein2(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                    const TransportMap& map, const QuadratureRule& rule) {
  if (mu.dim != nu.dim || mu.dim != map.dim)
    throw InvalidArgumentError("wasserstein2: dimension mismatch");
  const double s = integrate(
      [&](const Vec& x) { return norm2(x - map.value(x)) * mu.density(x); }, rule);
  return std::sqrt(std::max(s, 0.0));
}

double directional_lp_norm(const std::function<double(const Vec&)>& field,
                           const ProbabilityMeasure& mu, double p, const QuadratureRule& rule) {
  if (!(p >= 1.0)) throw InvalidArgumentError("directional_lp_norm: p must be >= 1");
  const double s = integrate(
      [&](const Vec& x) {
        const double v = std::max(std::abs(field(x)), 1e-300);
        return std::exp(p * std::log(v)) * mu.density(x);
      },
      rule);
  return std::pow(s, 1.0 / p);
}

}  // namespace otlab
