#pragma once

#include <functional>

#include "otlab/linalg.hpp"
#include "otlab/measures.hpp"
#include "otlab/quadrature.hpp"

namespace otlab {

//! sqrt(sum A_ij^2), the Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const Mat& a);

//! Largest |eigenvalue| of a symmetric matrix. Asymmetry beyond 1e-12 is an
//! AsymmetryError.
double op_norm(const Mat& a);

//! Largest singular value; agrees with op_norm on symmetric input.
double spectral_norm(const Mat& a);

//! Clamp negative eigenvalues to zero and reconstruct.
Mat positive_part(const Mat& a);

//! det(A) * exp(d - Tr A): the renormalized (Carleman) determinant of A - Id,
//! evaluated in log space. A must be positive definite.
double det2_fredholm(const Mat& a, int d);

//! log of the above, i.e. sum_i (log lambda_i + 1 - lambda_i) <= 0.
double log_det2_fredholm(const Mat& a, int d);

//! Symmetric square root; requires min eigenvalue > 1e-12.
Mat matrix_sqrt(const Mat& a);

//! Symmetric inverse square root (same eigenvalue floor).
Mat matrix_inv_sqrt(const Mat& a);

//! I_mu = int |grad V|^2 dmu.
double fisher_information(const ProbabilityMeasure& mu, const QuadratureRule& rule);

//! I_nu(g) = int |grad g|^2 / g dnu, computed in log form.
double relative_fisher(const RelativeDensity& g, const ProbabilityMeasure& nu,
                       const QuadratureRule& rule);

//! Ent_nu(g) = int g log g dnu.
double relative_entropy(const RelativeDensity& g, const ProbabilityMeasure& nu,
                        const QuadratureRule& rule);

//! (int |x - T(x)|^2 dmu)^{1/2} for a map sending mu onto nu.
struct TransportMap;
double wasserstein2(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                    const TransportMap& map, const QuadratureRule& rule);

//! (int |field|^p dmu)^{1/p}, p >= 1; non-integer p goes through exp(p log).
double directional_lp_norm(const std::function<double(const Vec&)>& field,
                           const ProbabilityMeasure& mu, double p, const QuadratureRule& rule);

}  // namespace otlab
