#include "otlab/transport.hpp"

#include <cmath>
#include <memory>

#include "cdf1d.hpp"
#include "otlab/calculus.hpp"

namespace otlab {

const char* to_string(MapKind k) {
  switch (k) {
    case MapKind::optimal_1d: return "optimal_1d";
    case MapKind::gaussian_linear: return "gaussian_linear";
    case MapKind::triangular: return "triangular";
    case MapKind::entropic: return "entropic";
  }
  return "?";
}

const char* to_string(AccuracyClass a) {
  switch (a) {
    case AccuracyClass::exact: return "exact";
    case AccuracyClass::grid: return "grid";
    case AccuracyClass::approximate: return "approximate";
  }
  return "?";
}

double accuracy_tolerance(AccuracyClass a) {
  switch (a) {
    case AccuracyClass::exact: return 1e-9;
    case AccuracyClass::grid: return 1e-4;
    case AccuracyClass::approximate: return 5e-2;
  }
  return 0.0;
}

// Shared evaluation box: both CDF grids cover the larger of the two default
// boxes plus a margin, so increment fields with |t e| <= 2 stay in-domain.
static double map_box_radius(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu) {
  return std::max(mu.rule.radius, nu.rule.radius) + 2.0;
}

namespace {

// Widens a CDF box until the density falls below the other measure's
// edge-density level: quantile lookups then never saturate at the grid edge,
// even for pairs with very different scales.
double extend_box_1d(const Potential& pot, double b0, double level) {
  double b = b0;
  const double cap = 3.0 * b0 + 12.0;
  while (b < cap) {
    const double lo = std::exp(-pot.value(Vec{-b}));
    const double hi = std::exp(-pot.value(Vec{b}));
    if (std::max(lo, hi) < 0.1 * level) break;
    b += 0.5;
  }
  return b + 3.0;
}

struct Brenier1dState {
  Cdf1d fmu, fnu;
  Potential vmu, vnu;

  Brenier1dState(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu, int grid,
                 double box_mu, double box_nu)
      : fmu([p = mu.potential](double x) { return std::exp(-p.value(Vec{x})); }, -box_mu, box_mu,
            grid),
        fnu([p = nu.potential](double x) { return std::exp(-p.value(Vec{x})); }, -box_nu, box_nu,
            grid),
        vmu(mu.potential), vnu(nu.potential) {}
};

}  // namespace

TransportMap brenier_1d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                        int cdf_grid) {
  if (mu.dim != 1 || nu.dim != 1)
    throw InvalidArgumentError("brenier_1d: both measures must be 1D");
  if (cdf_grid < 16) throw InvalidArgumentError("brenier_1d: cdf_grid too small");

  if (mu.gaussian && nu.gaussian) {
    // Affine quantile coupling between Gaussians, computed in closed form.
    const double mmu = mu.gaussian->mean[0], mnu = nu.gaussian->mean[0];
    const double slope = std::sqrt(nu.gaussian->cov(0, 0) / mu.gaussian->cov(0, 0));
    TransportMap t;
    t.dim = 1;
    t.kind = MapKind::optimal_1d;
    t.accuracy = AccuracyClass::exact;
    t.domain_radius = 1e100;
    t.value = [mmu, mnu, slope](const Vec& x) { return Vec{mnu + slope * (x[0] - mmu)}; };
    t.jacobian = [slope](const Vec&) {
      Mat j(1);
      j(0, 0) = slope;
      return j;
    };
    t.jacobian_dderiv = [](const Vec&, const Vec&) { return Mat(1); };
    t.inverse_value = [mmu, mnu, slope](const Vec& y) {
      return Vec{mmu + (y[0] - mnu) / slope};
    };
    return t;
  }

  const double box = map_box_radius(mu, nu);
  const double level_mu =
      std::min(std::exp(-mu.potential.value(Vec{-box})), std::exp(-mu.potential.value(Vec{box})));
  const double level_nu =
      std::min(std::exp(-nu.potential.value(Vec{-box})), std::exp(-nu.potential.value(Vec{box})));
  const double box_mu = extend_box_1d(mu.potential, box, level_nu);
  const double box_nu = extend_box_1d(nu.potential, box, level_mu);
  auto st = std::make_shared<Brenier1dState>(mu, nu, cdf_grid, box_mu, box_nu);

  auto value1 = [st](double x) { return st->fmu.map_to(st->fnu, x); };
  auto deriv1 = [st](double x, double tx) {
    return st->fmu.density(x) / st->fnu.density(tx);
  };

  TransportMap t;
  t.dim = 1;
  t.kind = MapKind::optimal_1d;
  t.accuracy = AccuracyClass::grid;
  t.domain_radius = box;
  t.value = [value1](const Vec& x) { return Vec{value1(x[0])}; };
  t.jacobian = [value1, deriv1](const Vec& x) {
    Mat j(1);
    j(0, 0) = deriv1(x[0], value1(x[0]));
    return j;
  };
  // T'' = [rho_mu'(x) rho_nu(T) - rho_mu(x) rho_nu'(T) T'] / rho_nu(T)^2,
  // with rho' = -V' rho.
  t.jacobian_dderiv = [st, value1, deriv1](const Vec& x, const Vec& e) {
    const double tx = value1(x[0]);
    const double rmu = st->fmu.density(x[0]);
    const double rnu = st->fnu.density(tx);
    const double tp = rmu / rnu;
    const double drmu = -st->vmu.gradient(x)[0] * rmu;
    const double drnu = -st->vnu.gradient(Vec{tx})[0] * rnu;
    Mat j(1);
    j(0, 0) = e[0] * (drmu * rnu - rmu * drnu * tp) / (rnu * rnu);
    return j;
  };
  t.inverse_value = [st](const Vec& y) { return Vec{st->fnu.map_to(st->fmu, y[0])}; };
  return t;
}

TransportMap brenier_gaussian(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu) {
  if (!mu.gaussian || !nu.gaussian)
    throw InvalidArgumentError("brenier_gaussian: both measures must be Gaussian");
  if (mu.dim != nu.dim) throw InvalidArgumentError("brenier_gaussian: dimension mismatch");

  const Mat s_half = matrix_sqrt(mu.gaussian->cov);
  const Mat s_half_inv = matrix_inv_sqrt(mu.gaussian->cov);
  const Mat inner = matrix_sqrt(s_half * nu.gaussian->cov * s_half);
  const Mat a = s_half_inv * inner * s_half_inv;
  const Mat a_inv = inverse(a);
  const Vec mmu = mu.gaussian->mean, mnu = nu.gaussian->mean;

  TransportMap t;
  t.dim = mu.dim;
  t.kind = MapKind::gaussian_linear;
  t.accuracy = AccuracyClass::exact;
  t.domain_radius = 1e100;
  t.value = [a, mmu, mnu](const Vec& x) { return mnu + a * (x - mmu); };
  t.jacobian = [a](const Vec&) { return a; };
  t.jacobian_dderiv = [d = mu.dim](const Vec&, const Vec&) { return Mat(d); };
  t.inverse_value = [a_inv, mmu, mnu](const Vec& y) { return mmu + a_inv * (y - mnu); };
  return t;
}

TransportMap identity_map(int dim) {
  TransportMap t;
  t.dim = dim;
  t.kind = MapKind::gaussian_linear;
  t.accuracy = AccuracyClass::exact;
  t.domain_radius = 1e100;
  t.value = [](const Vec& x) { return x; };
  t.jacobian = [dim](const Vec&) { return Mat::identity(dim); };
  t.jacobian_dderiv = [dim](const Vec&, const Vec&) { return Mat(dim); };
  t.inverse_value = [](const Vec& y) { return y; };
  return t;
}

DisplacementField increment_map(const TransportMap& map, const Vec& e, double t) {
  if (e.dim != map.dim) throw InvalidArgumentError("increment_map: direction dimension mismatch");
  const Vec step = t * e;
  const double r = map.domain_radius;
  auto inside = [r](const Vec& p) {
    for (int i = 0; i < p.dim; ++i)
      if (std::abs(p[i]) > r) return false;
    return true;
  };
  DisplacementField f;
  f.step = step;
  f.displacement = [map = &map, step, inside](const Vec& x) {
    const Vec xs = x + step;
    if (!inside(x) || !inside(xs))
      throw DomainBoxError("increment_map: point leaves the map's box");
    return map->value(xs) - map->value(x);
  };
  f.squared_norm = [disp = f.displacement](const Vec& x) { return norm2(disp(x)); };
  return f;
}

std::vector<std::function<double(const Vec&)>> pushforward_battery(int dim) {
  std::vector<std::function<double(const Vec&)>> fs;
  // All monomials of total degree 1..3, then a bounded bump.
  std::vector<std::array<int, kMaxDim>> expos;
  std::array<int, kMaxDim> a{};
  for (int d0 = 0; d0 <= 3; ++d0)
    for (int d1 = 0; d1 <= (dim > 1 ? 3 : 0); ++d1)
      for (int d2 = 0; d2 <= (dim > 2 ? 3 : 0); ++d2) {
        const int total = d0 + d1 + d2;
        if (total < 1 || total > 3) continue;
        a = {d0, d1, d2};
        expos.push_back(a);
      }
  for (const auto& ex : expos) {
    fs.push_back([ex](const Vec& x) {
      double v = 1.0;
      for (int i = 0; i < x.dim; ++i)
        for (int k = 0; k < ex[static_cast<std::size_t>(i)]; ++k) v *= x[i];
      return v;
    });
  }
  fs.push_back([](const Vec& x) { return std::exp(-norm2(x) / 4.0); });
  return fs;
}

double pushforward_error(const TransportMap& map, const ProbabilityMeasure& mu,
                         const ProbabilityMeasure& nu, const QuadratureRule& rule_mu,
                         const QuadratureRule& rule_nu) {
  const auto battery = pushforward_battery(mu.dim);
  // One sweep evaluates T per node and feeds every test function, so the map
  // (the expensive part for grid and entropic kinds) is applied once.
  std::vector<std::vector<double>> terms(battery.size(),
                                         std::vector<double>(rule_mu.nodes.size()));
  for (std::size_t i = 0; i < rule_mu.nodes.size(); ++i) {
    const Vec& x = rule_mu.nodes[i];
    const Vec tx = map.value(x);
    const double w = rule_mu.weights[i] * mu.density(x);
    for (std::size_t k = 0; k < battery.size(); ++k) terms[k][i] = w * battery[k](tx);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < battery.size(); ++k) {
    const double push = pairwise_sum(terms[k]);
    const double direct =
        integrate([&](const Vec& x) { return battery[k](x) * nu.density(x); }, rule_nu);
    worst = std::max(worst, std::abs(push - direct));
  }
  return worst;
}

TransportMap build_map(const MapDesc& desc, const ProbabilityMeasure& mu,
                       const ProbabilityMeasure& nu) {
  if (mu.dim != nu.dim) throw InvalidArgumentError("build_map: dimension mismatch");
  std::string method = desc.method;
  if (method == "auto") {
    if (mu.gaussian && nu.gaussian)
      method = "gaussian";
    else if (mu.dim == 1)
      method = "brenier_1d";
    else if (mu.dim == 2)
      method = "knothe";
    else
      throw InvalidArgumentError("build_map: no automatic method for non-Gaussian 3D pairs");
  }
  if (method == "gaussian") return brenier_gaussian(mu, nu);
  if (method == "brenier_1d") return brenier_1d(mu, nu, desc.cdf_grid);
  if (method == "knothe") return knothe_2d(mu, nu, desc.cdf_grid);
  if (method == "sinkhorn") {
    SinkhornOptions opts;
    opts.grid_points = desc.sinkhorn_grid;
    return sinkhorn_2d(mu, nu, desc.epsilon, desc.max_iter, opts);
  }
  throw InvalidArgumentError("build_map: unknown method '" + desc.method + "'");
}

}  // namespace otlab
