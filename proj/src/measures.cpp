#include "otlab/measures.hpp"

#include <cmath>
#include <cstdio>

namespace otlab {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2

QuadratureRule measure_rule(int dim, double center, double scale, const QuadPolicy& policy) {
  return tensor_rule(dim, policy.order_for(dim), center + policy.radius_sigmas * scale);
}

}  // namespace

ProbabilityMeasure normalize(Potential pot, const QuadratureRule& rule) {
  // Integrate the full potential (any existing log_norm included), so
  // renormalizing an already-normalized measure is a ~zero shift.
  const auto raw_density = [&pot](const Vec& x) { return std::exp(-pot.value(x)); };
  const double z1 = integrate(raw_density, rule);
  if (!(z1 > 0.0)) throw DomainTooSmallError("normalize: vanishing mass on the box");

  // Stability probes: doubled order on the same box (quadrature resolution)
  // and doubled order on a 1.5x box (tail mass).
  const QuadratureRule fine = tensor_rule(rule.dim, 2 * rule.order, rule.radius);
  const QuadratureRule wide = tensor_rule(rule.dim, 2 * rule.order, 1.5 * rule.radius);
  const double z2 = integrate(raw_density, fine);
  const double z3 = integrate(raw_density, wide);
  if (std::abs(z2 - z1) > 1e-12 * z1 || std::abs(z3 - z2) > 1e-12 * z2) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "normalize: box not converged under order/radius doubling "
                  "(order rel %.3e, radius rel %.3e)",
                  std::abs(z2 - z1) / z1, std::abs(z3 - z2) / z2);
    throw DomainTooSmallError(msg);
  }

  ProbabilityMeasure m;
  m.dim = rule.dim;
  m.potential = std::move(pot);
  m.potential.log_norm += std::log(z1);
  m.rule = rule;
  m.second_moment = integrate([&m](const Vec& x) { return norm2(x) * m.density(x); }, rule);
  m.fisher_information =
      integrate([&m](const Vec& x) { return norm2(m.potential.gradient(x)) * m.density(x); },
                rule);
  return m;
}

ProbabilityMeasure make_gaussian(const Vec& mean, const Mat& covariance,
                                 const QuadPolicy& policy) {
  const int d = mean.dim;
  if (d < 1 || d > kMaxDim)
    throw UnsupportedDimensionError("make_gaussian: dim must be 1..3");
  if (covariance.dim != d)
    throw InvalidCovarianceError("make_gaussian: covariance dimension mismatch");
  if (asymmetry(covariance) > 1e-12)
    throw InvalidCovarianceError("make_gaussian: covariance must be symmetric");
  const SymSpectrum spec = sym_eigen(covariance);
  if (spec.eigenvalues[0] <= 0.0)
    throw InvalidCovarianceError("make_gaussian: covariance must be positive definite");

  const Mat cov_inv = inverse(covariance);

  Potential pot;
  pot.dim = d;
  pot.raw_value = [cov_inv, mean](const Vec& x) {
    const Vec y = x - mean;
    return 0.5 * dot(cov_inv * y, y);
  };
  pot.gradient = [cov_inv, mean](const Vec& x) { return cov_inv * (x - mean); };
  pot.hessian = [cov_inv](const Vec&) { return cov_inv; };
  pot.hessian_dderiv = [d](const Vec&, const Vec&) { return Mat(d); };
  pot.convexity_bound = 1.0 / spec.eigenvalues[d - 1];

  double center = 0.0;
  for (int i = 0; i < d; ++i) center = std::max(center, std::abs(mean[i]));
  const double scale = std::sqrt(spec.eigenvalues[d - 1]);

  ProbabilityMeasure m = normalize(std::move(pot), measure_rule(d, center, scale, policy));

  // Quadrature normalizer cross-checked against the closed form.
  double log_det_cov = 0.0;
  for (int i = 0; i < d; ++i) log_det_cov += std::log(spec.eigenvalues[i]);
  const double log_norm_cf = d * kHalfLog2Pi + 0.5 * log_det_cov;
  if (std::abs(m.potential.log_norm - log_norm_cf) > 1e-9)
    throw Error("make_gaussian: quadrature normalizer disagrees with the closed form");

  GaussianInfo info;
  info.mean = mean;
  info.cov = covariance;
  info.cov_inv = cov_inv;
  info.max_eig_cov = spec.eigenvalues[d - 1];
  info.min_eig_cov = spec.eigenvalues[0];
  m.gaussian = info;
  m.center_bound = center;
  m.scale_bound = scale;
  for (int i = 0; i < d; ++i) m.axis_scale[static_cast<std::size_t>(i)] = std::sqrt(covariance(i, i));
  return m;
}

ProbabilityMeasure make_perturbed_gaussian(double amplitude, double frequency,
                                           const QuadPolicy& policy) {
  if (std::abs(amplitude) > 0.45)
    throw InvalidArgumentError("make_perturbed_gaussian: |amplitude| must be <= 0.45");
  if (!(frequency > 0.0))
    throw InvalidArgumentError("make_perturbed_gaussian: frequency must be positive");

  const double a = amplitude, w = frequency;
  Potential pot;
  pot.dim = 1;
  pot.raw_value = [a, w](const Vec& x) { return 0.5 * x[0] * x[0] + a * std::cos(w * x[0]); };
  pot.gradient = [a, w](const Vec& x) {
    Vec g(1);
    g[0] = x[0] - a * w * std::sin(w * x[0]);
    return g;
  };
  pot.hessian = [a, w](const Vec& x) {
    Mat h(1);
    h(0, 0) = 1.0 - a * w * w * std::cos(w * x[0]);
    return h;
  };
  pot.hessian_dderiv = [a, w](const Vec& x, const Vec& e) {
    Mat h(1);
    h(0, 0) = e[0] * a * w * w * w * std::sin(w * x[0]);
    return h;
  };
  const double curv_min = 1.0 - std::abs(a) * w * w;
  if (curv_min > 0.0) pot.convexity_bound = curv_min;

  const double scale = curv_min >= 0.45 ? 1.0 / std::sqrt(curv_min) : 1.5;
  ProbabilityMeasure m = normalize(std::move(pot), measure_rule(1, 0.0, scale, policy));
  m.center_bound = 0.0;
  m.scale_bound = scale;
  m.axis_scale[0] = scale;
  return m;
}

RelativeDensity make_gaussian_shift_density(const Vec& h) {
  RelativeDensity g;
  g.dim = h.dim;
  const double half_h2 = 0.5 * norm2(h);
  g.log_value = [h, half_h2](const Vec& x) { return dot(h, x) - half_h2; };
  g.grad_log = [h](const Vec&) { return h; };
  g.hessian_log = [d = h.dim](const Vec&) { return Mat(d); };
  return g;
}

RelativeDensity density_ratio(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu) {
  if (mu.dim != nu.dim) throw InvalidArgumentError("density_ratio: dimension mismatch");
  RelativeDensity g;
  g.dim = mu.dim;
  const Potential pv = mu.potential;
  const Potential pw = nu.potential;
  g.log_value = [pv, pw](const Vec& x) { return pw.value(x) - pv.value(x); };
  g.grad_log = [pv, pw](const Vec& x) { return pw.gradient(x) - pv.gradient(x); };
  g.hessian_log = [pv, pw](const Vec& x) { return pw.hessian(x) - pv.hessian(x); };
  return g;
}

ProbabilityMeasure make_product(const std::vector<ProbabilityMeasure>& factors,
                                const QuadPolicy& policy) {
  if (factors.size() != 2)
    throw InvalidArgumentError("make_product: exactly two 1D factors are supported");
  for (const auto& f : factors)
    if (f.dim != 1) throw InvalidArgumentError("make_product: factors must be 1D");

  const Potential p0 = factors[0].potential;
  const Potential p1 = factors[1].potential;
  Potential pot;
  pot.dim = 2;
  auto split = [](const Vec& x, int k) {
    Vec y(1);
    y[0] = x[k];
    return y;
  };
  pot.raw_value = [p0, p1, split](const Vec& x) {
    return p0.value(split(x, 0)) + p1.value(split(x, 1));
  };
  pot.gradient = [p0, p1, split](const Vec& x) {
    Vec g(2);
    g[0] = p0.gradient(split(x, 0))[0];
    g[1] = p1.gradient(split(x, 1))[0];
    return g;
  };
  pot.hessian = [p0, p1, split](const Vec& x) {
    Mat h(2);
    h(0, 0) = p0.hessian(split(x, 0))(0, 0);
    h(1, 1) = p1.hessian(split(x, 1))(0, 0);
    return h;
  };
  pot.hessian_dderiv = [p0, p1, split](const Vec& x, const Vec& e) {
    Mat h(2);
    Vec e1(1);
    e1[0] = e[0];
    Vec e2(1);
    e2[0] = e[1];
    h(0, 0) = p0.hessian_dderiv(split(x, 0), e1)(0, 0);
    h(1, 1) = p1.hessian_dderiv(split(x, 1), e2)(0, 0);
    return h;
  };
  if (factors[0].potential.convexity_bound && factors[1].potential.convexity_bound)
    pot.convexity_bound =
        std::min(*factors[0].potential.convexity_bound, *factors[1].potential.convexity_bound);

  double center = std::max(factors[0].center_bound, factors[1].center_bound);
  double scale = std::max(factors[0].scale_bound, factors[1].scale_bound);
  ProbabilityMeasure m = normalize(std::move(pot), measure_rule(2, center, scale, policy));
  m.center_bound = center;
  m.scale_bound = scale;
  m.axis_scale[0] = factors[0].scale_bound;
  m.axis_scale[1] = factors[1].scale_bound;
  m.gaussian.reset();
  if (factors[0].gaussian && factors[1].gaussian) {
    GaussianInfo info;
    info.mean = Vec{factors[0].gaussian->mean[0], factors[1].gaussian->mean[0]};
    info.cov = Mat::diag({factors[0].gaussian->cov(0, 0), factors[1].gaussian->cov(0, 0)});
    info.cov_inv = inverse(info.cov);
    info.max_eig_cov = std::max(info.cov(0, 0), info.cov(1, 1));
    info.min_eig_cov = std::min(info.cov(0, 0), info.cov(1, 1));
    m.gaussian = info;
  }
  return m;
}

ProbabilityMeasure build_measure(const MeasureDesc& desc, const QuadPolicy& policy) {
  if (desc.kind == "gaussian") return make_gaussian(desc.mean, desc.cov, policy);
  if (desc.kind == "perturbed_gaussian")
    return make_perturbed_gaussian(desc.amplitude, desc.frequency, policy);
  if (desc.kind == "gaussian_shift_density") {
    // The measure behind the shift density is N(h, Id).
    return make_gaussian(desc.shift, Mat::identity(desc.shift.dim), policy);
  }
  if (desc.kind == "product") {
    std::vector<ProbabilityMeasure> fs;
    fs.reserve(desc.factors.size());
    for (const auto& f : desc.factors) fs.push_back(build_measure(f, policy));
    return make_product(fs, policy);
  }
  throw InvalidArgumentError("build_measure: unknown measure kind '" + desc.kind + "'");
}

}  // namespace otlab
