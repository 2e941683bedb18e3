#pragma once

#include <functional>
#include <string>
#include <vector>

#include "otlab/linalg.hpp"
#include "otlab/measures.hpp"

namespace otlab {

enum class MapKind { optimal_1d, gaussian_linear, triangular, entropic };
enum class AccuracyClass { exact, grid, approximate };

const char* to_string(MapKind k);
const char* to_string(AccuracyClass a);

//! Pushforward / inverse-consistency tolerance per accuracy class:
//! exact 1e-9, grid 1e-4, approximate 5e-2.
double accuracy_tolerance(AccuracyClass a);

//! A transport map T sending mu onto nu, with exact Jacobian DT (= D^2 Phi for
//! optimal kinds) and directional Jacobian derivatives d_e DT (= D^2 Phi_e).
struct TransportMap {
  int dim = 0;
  MapKind kind = MapKind::gaussian_linear;
  AccuracyClass accuracy = AccuracyClass::exact;
  double domain_radius = 0.0;  // sup-norm box on which evaluation is valid

  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Mat(const Vec&, const Vec&)> jacobian_dderiv;
  std::function<Vec(const Vec&)> inverse_value;  // may be empty

  bool has_inverse() const { return static_cast<bool>(inverse_value); }
};

//! Monotone quantile coupling T = F_nu^{-1} o F_mu on a CDF grid; collapses to
//! the closed affine form (accuracy exact) when both measures are Gaussian.
TransportMap brenier_1d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                        int cdf_grid = 1024);

//! Closed-form optimal map between Gaussians:
//! T(x) = m_nu + A (x - m_mu), A = S^{-1/2} (S^{1/2} C S^{1/2})^{1/2} S^{-1/2}
//! with S = cov(mu), C = cov(nu).
TransportMap brenier_gaussian(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu);

//! Triangular (conditional-quantile) rearrangement in 2D.
TransportMap knothe_2d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                       int cdf_grid = 1024);

struct SinkhornOptions {
  int grid_points = 128;      // atoms per axis
  double box_sigmas = 6.5;    // atom box half-width in per-axis std units
  double marginal_tol = 1e-9;
  double overrelax = 1.7;     // dual extrapolation factor (safeguarded)
};

//! Entropic map on an internal tensor grid of atoms: log-domain alternating
//! projections with epsilon scaling, map by barycentric projection.
TransportMap sinkhorn_2d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                         double epsilon, int max_iter, const SinkhornOptions& opts = {});

//! T: nu -> nu, the identity coupling.
TransportMap identity_map(int dim);

//! Displacement x -> T(x + t e) - T(x) and its squared norm, for integration.
struct DisplacementField {
  Vec step;  // t * e
  std::function<Vec(const Vec&)> displacement;
  std::function<double(const Vec&)> squared_norm;
};

DisplacementField increment_map(const TransportMap& map, const Vec& e, double t);

//! Fixed battery of pushforward test functions: monomials of total degree <= 3
//! plus exp(-|x|^2/4).
std::vector<std::function<double(const Vec&)>> pushforward_battery(int dim);

//! max over the battery of |int phi(T(x)) dmu - int phi dnu|.
double pushforward_error(const TransportMap& map, const ProbabilityMeasure& mu,
                         const ProbabilityMeasure& nu, const QuadratureRule& rule_mu,
                         const QuadratureRule& rule_nu);

//! Config-facing map descriptor. "auto" resolves to gaussian for Gaussian
//! pairs, brenier_1d in 1D and knothe in 2D.
struct MapDesc {
  std::string method = "auto";  // auto | brenier_1d | gaussian | knothe | sinkhorn
  int cdf_grid = 1024;
  double epsilon = 1e-2;
  int max_iter = 10000;
  int sinkhorn_grid = 128;
};

TransportMap build_map(const MapDesc& desc, const ProbabilityMeasure& mu,
                       const ProbabilityMeasure& nu);

}  // namespace otlab
