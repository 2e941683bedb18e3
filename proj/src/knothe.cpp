#include <cmath>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "cdf1d.hpp"
#include "otlab/quadrature.hpp"
#include "otlab/transport.hpp"

namespace otlab {

namespace {

uint64_t key_bits(double x) {
  uint64_t k;
  std::memcpy(&k, &x, sizeof(k));
  return k;
}

// FIFO cache of conditional-slice CDFs keyed by the conditioning coordinate.
class SliceCache {
 public:
  explicit SliceCache(std::size_t cap) : cap_(cap) {}

  const Cdf1d& get(double key, const std::function<std::unique_ptr<Cdf1d>(double)>& build) {
    const uint64_t k = key_bits(key);
    auto it = map_.find(k);
    if (it != map_.end()) return *it->second;
    auto ins = map_.emplace(k, build(key));
    order_.push_back(k);
    if (order_.size() > cap_) {
      map_.erase(order_.front());
      order_.pop_front();
    }
    return *ins.first->second;
  }

 private:
  std::size_t cap_;
  std::unordered_map<uint64_t, std::unique_ptr<Cdf1d>> map_;
  std::deque<uint64_t> order_;
};

struct KnotheState {
  Potential vmu, vnu;
  double box;
  int slice_grid;
  std::vector<double> inner_x, inner_w;  // quadrature for marginal densities

  std::unique_ptr<Cdf1d> marg_mu, marg_nu;
  SliceCache mu_slices{128}, nu_slices{128};
  std::unordered_map<uint64_t, double> t1_cache;
  std::deque<uint64_t> t1_order;
  std::mutex mtx;

  KnotheState(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu, int cdf_grid,
              double box_radius)
      : vmu(mu.potential), vnu(nu.potential), box(box_radius), slice_grid(cdf_grid) {
    gauss_legendre(160, inner_x, inner_w);
    for (auto& x : inner_x) x *= box;
    for (auto& w : inner_w) w *= box;
    marg_mu = std::make_unique<Cdf1d>([this](double x1) { return marginal(vmu, x1); }, -box, box,
                                      cdf_grid);
    marg_nu = std::make_unique<Cdf1d>([this](double x1) { return marginal(vnu, x1); }, -box, box,
                                      cdf_grid);
  }

  double marginal(const Potential& v, double x1) const {
    double s = 0.0;
    for (std::size_t k = 0; k < inner_x.size(); ++k)
      s += inner_w[k] * std::exp(-v.value(Vec{x1, inner_x[k]}));
    return s;
  }

  std::unique_ptr<Cdf1d> build_slice(const Potential& v, double x1) const {
    auto density = [&v, x1](double s) { return std::exp(-v.value(Vec{x1, s})); };
    auto companion = [&v, x1](double s) {
      const Vec p{x1, s};
      return -v.gradient(p)[0] * std::exp(-v.value(p));
    };
    return std::make_unique<Cdf1d>(density, -box, box, slice_grid, companion);
  }

  const Cdf1d& mu_slice(double x1) {
    return mu_slices.get(x1, [this](double k) { return build_slice(vmu, k); });
  }
  const Cdf1d& nu_slice(double y1) {
    return nu_slices.get(y1, [this](double k) { return build_slice(vnu, k); });
  }

  double t1(double x1) {
    const uint64_t k = key_bits(x1);
    auto it = t1_cache.find(k);
    if (it != t1_cache.end()) return it->second;
    const double y1 = marg_mu->map_to(*marg_nu, x1);
    t1_cache.emplace(k, y1);
    t1_order.push_back(k);
    if (t1_order.size() > 8192) {
      t1_cache.erase(t1_order.front());
      t1_order.pop_front();
    }
    return y1;
  }

  Vec value(const Vec& x) {
    std::lock_guard<std::mutex> lock(mtx);
    const double y1 = t1(x[0]);
    const double y2 = mu_slice(x[0]).map_to(nu_slice(y1), x[1]);
    return Vec{y1, y2};
  }

  Mat jacobian(const Vec& x) {
    std::lock_guard<std::mutex> lock(mtx);
    const double y1 = t1(x[0]);
    const Cdf1d& smu = mu_slice(x[0]);
    const Cdf1d& snu = nu_slice(y1);
    const double y2 = smu.map_to(snu, x[1]);

    const double mmu = smu.total(), mnu = snu.total();
    const double rho_mu = std::exp(-vmu.value(x));
    const double rho_nu = std::exp(-vnu.value(Vec{y1, y2}));
    const double cond_nu = rho_nu / mnu;

    const double j11 = mmu / mnu;
    const double j22 = (rho_mu / mmu) / cond_nu;
    // d/dx1 of the conditional CDFs, via the companion accumulation of
    // d1 rho = -d1 V * rho.
    const double f = smu.cdf(x[1]) / mmu;
    const double df_mu = (smu.companion_cdf(x[1]) - f * smu.companion_total()) / mmu;
    const double g = snu.cdf(y2) / mnu;
    const double df_nu = (snu.companion_cdf(y2) - g * snu.companion_total()) / mnu;
    const double j21 = (df_mu - j11 * df_nu) / cond_nu;

    Mat j(2);
    j(0, 0) = j11;
    j(1, 0) = j21;
    j(1, 1) = j22;
    return j;
  }
};

}  // namespace

TransportMap knothe_2d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                       int cdf_grid) {
  if (mu.dim != 2 || nu.dim != 2)
    throw InvalidArgumentError("knothe_2d: both measures must be 2D");
  if (cdf_grid < 16) throw InvalidArgumentError("knothe_2d: cdf_grid too small");

  const double box = std::max(mu.rule.radius, nu.rule.radius) + 2.0;
  auto st = std::make_shared<KnotheState>(mu, nu, cdf_grid, box);

  TransportMap t;
  t.dim = 2;
  t.kind = MapKind::triangular;
  t.accuracy = AccuracyClass::grid;
  t.domain_radius = box;
  t.value = [st](const Vec& x) { return st->value(x); };
  t.jacobian = [st](const Vec& x) { return st->jacobian(x); };
  t.jacobian_dderiv = [st](const Vec& x, const Vec& e) {
    const double h = 1e-4 * (1.0 + norm(x));
    const Mat jp = st->jacobian(x + h * e);
    const Mat jm = st->jacobian(x - h * e);
    return (1.0 / (2.0 * h)) * (jp - jm);
  };
  // No explicit inverse for the triangular map.
  return t;
}

}  // namespace otlab
