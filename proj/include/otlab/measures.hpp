#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otlab/linalg.hpp"
#include "otlab/quadrature.hpp"

namespace otlab {

//! Quadrature sizing policy. Default box: radius = |mean| + radius_sigmas *
//! (largest standard deviation); orders per dimension as below.
struct QuadPolicy {
  int order_1d = 400;
  int order_2d = 200;
  int order_3d = 64;
  double radius_sigmas = 12.0;

  int order_for(int dim) const { return dim == 1 ? order_1d : (dim == 2 ? order_2d : order_3d); }
};

//! Smooth scalar potential V with analytic derivatives through third order.
//! The full potential is raw_value + log_norm, so exp(-value()) integrates
//! to one once normalize() has run.
struct Potential {
  int dim = 0;
  std::function<double(const Vec&)> raw_value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  // (x, e) -> directional derivative of the Hessian along e.
  std::function<Mat(const Vec&, const Vec&)> hessian_dderiv;
  std::optional<double> convexity_bound;  // K with D^2 V >= K Id, when claimed
  double log_norm = 0.0;

  double value(const Vec& x) const { return raw_value(x) + log_norm; }
};

struct GaussianInfo {
  Vec mean;
  Mat cov;
  Mat cov_inv;
  double max_eig_cov = 0.0;
  double min_eig_cov = 0.0;
};

//! Normalized probability measure exp(-V) dx with cached functionals.
struct ProbabilityMeasure {
  int dim = 0;
  Potential potential;
  std::optional<GaussianInfo> gaussian;

  double second_moment = 0.0;       // int |x|^2 dmu
  double fisher_information = 0.0;  // int |grad V|^2 dmu

  // Box-sizing data for the default radius policy.
  double center_bound = 0.0;                 // max_i |mean_i|
  double scale_bound = 1.0;                  // largest marginal std deviation
  std::array<double, kMaxDim> axis_scale{};  // per-axis std bound

  QuadratureRule rule;  // rule the measure was normalized on

  double density(const Vec& x) const { return std::exp(-potential.value(x)); }
  double default_radius(double sigmas) const { return center_bound + sigmas * scale_bound; }
};

//! Relative density g of mu = g * nu, stored in log form for stable tails.
struct RelativeDensity {
  int dim = 0;
  std::function<double(const Vec&)> log_value;
  std::function<Vec(const Vec&)> grad_log;
  std::function<Mat(const Vec&)> hessian_log;

  double value(const Vec& x) const { return std::exp(log_value(x)); }
  Vec gradient(const Vec& x) const { return value(x) * grad_log(x); }
  Mat hessian(const Vec& x) const {
    const Vec gl = grad_log(x);
    return value(x) * (outer(gl, gl) + hessian_log(x));
  }
};

//! Renormalizes exp(-V) on the rule's box. The box is rejected when the
//! normalizer is not stable under order doubling and a 1.5x wider box.
//! Caches second moment and Fisher information.
ProbabilityMeasure normalize(Potential pot, const QuadratureRule& rule);

ProbabilityMeasure make_gaussian(const Vec& mean, const Mat& covariance,
                                 const QuadPolicy& policy = {});

//! 1D potential x^2/2 + amplitude*cos(frequency*x); |amplitude| <= 0.45.
ProbabilityMeasure make_perturbed_gaussian(double amplitude, double frequency = 1.0,
                                           const QuadPolicy& policy = {});

//! g(x) = exp(<h,x> - |h|^2/2), so g * gamma = N(h, Id).
RelativeDensity make_gaussian_shift_density(const Vec& h);

//! g = d(mu)/d(nu) from the two normalized potentials.
RelativeDensity density_ratio(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu);

//! Product of 1D catalog members (two factors -> a 2D measure).
ProbabilityMeasure make_product(const std::vector<ProbabilityMeasure>& factors,
                                const QuadPolicy& policy = {});

//! Config-facing measure descriptor; see the config file schema.
struct MeasureDesc {
  std::string kind;  // gaussian | perturbed_gaussian | product | gaussian_shift_density
  Vec mean;
  Mat cov;
  double amplitude = 0.0;
  double frequency = 1.0;
  Vec shift;  // h for gaussian_shift_density
  std::vector<MeasureDesc> factors;
};

ProbabilityMeasure build_measure(const MeasureDesc& desc, const QuadPolicy& policy = {});

}  // namespace otlab
