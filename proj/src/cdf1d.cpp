#include "cdf1d.hpp"

#include <algorithm>
#include <cmath>

#include "otlab/quadrature.hpp"

namespace otlab {

namespace {

struct Gl16 {
  std::vector<double> x, w;
  Gl16() { gauss_legendre(16, x, w); }
};

const Gl16& gl16() {
  static const Gl16 g;
  return g;
}

// Monotone cubic (Fritsch-Carlson) interpolation of y(u) through up to four
// table points; used only as a Newton starting guess.
double pchip_guess(const std::vector<double>& u, const std::vector<double>& y, int j, double uq) {
  const int n = static_cast<int>(u.size());
  const double h = u[static_cast<std::size_t>(j + 1)] - u[static_cast<std::size_t>(j)];
  if (!(h > 0.0)) return 0.5 * (y[static_cast<std::size_t>(j)] + y[static_cast<std::size_t>(j + 1)]);
  auto secant = [&](int k) {
    const double du = u[static_cast<std::size_t>(k + 1)] - u[static_cast<std::size_t>(k)];
    return du > 0.0 ? (y[static_cast<std::size_t>(k + 1)] - y[static_cast<std::size_t>(k)]) / du : 0.0;
  };
  const double s = secant(j);
  auto tangent = [&](int k) {
    if (k <= 0 || k >= n - 1) return s;
    const double s0 = secant(k - 1), s1 = secant(k);
    if (s0 * s1 <= 0.0) return 0.0;
    const double h0 = u[static_cast<std::size_t>(k)] - u[static_cast<std::size_t>(k - 1)];
    const double h1 = u[static_cast<std::size_t>(k + 1)] - u[static_cast<std::size_t>(k)];
    const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
    return (w0 + w1) / (w0 / s0 + w1 / s1);
  };
  const double d0 = tangent(j), d1 = tangent(j + 1);
  const double t = (uq - u[static_cast<std::size_t>(j)]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y[static_cast<std::size_t>(j)] +
         (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y[static_cast<std::size_t>(j + 1)] +
         (t3 - t2) * h * d1;
}

}  // namespace

Cdf1d::Cdf1d(std::function<double(double)> density, double lo, double hi, int grid,
             std::function<double(double)> companion)
    : density_(std::move(density)), companion_(std::move(companion)), lo_(lo), hi_(hi),
      grid_(grid) {
  if (!(hi > lo) || grid < 8) throw InvalidArgumentError("Cdf1d: bad grid parameters");
  h_ = (hi - lo) / grid;
  xs_.resize(static_cast<std::size_t>(grid + 1));
  for (int j = 0; j <= grid; ++j) xs_[static_cast<std::size_t>(j)] = lo + j * h_;
  xs_.back() = hi;

  std::vector<double> panels(static_cast<std::size_t>(grid));
  std::vector<double> cpanels(companion_ ? static_cast<std::size_t>(grid) : 0);
  for (int j = 0; j < grid; ++j) {
    const double a = xs_[static_cast<std::size_t>(j)], b = xs_[static_cast<std::size_t>(j + 1)];
    panels[static_cast<std::size_t>(j)] = panel(density_, a, b);
    if (companion_) cpanels[static_cast<std::size_t>(j)] = panel(companion_, a, b);
  }
  // Degenerate density anywhere on the grid poisons quantile inversion.
  for (int j = 0; j <= grid; ++j) {
    const double rho = density_(xs_[static_cast<std::size_t>(j)]);
    if (!(rho >= 1e-300))
      throw UnderflowError("Cdf1d: density underflows below 1e-300 inside the box");
  }
  lower_.assign(static_cast<std::size_t>(grid + 1), 0.0);
  upper_.assign(static_cast<std::size_t>(grid + 1), 0.0);
  for (int j = 0; j < grid; ++j)
    lower_[static_cast<std::size_t>(j + 1)] =
        lower_[static_cast<std::size_t>(j)] + panels[static_cast<std::size_t>(j)];
  for (int j = grid - 1; j >= 0; --j)
    upper_[static_cast<std::size_t>(j)] =
        upper_[static_cast<std::size_t>(j + 1)] + panels[static_cast<std::size_t>(j)];
  if (companion_) {
    clower_.assign(static_cast<std::size_t>(grid + 1), 0.0);
    for (int j = 0; j < grid; ++j)
      clower_[static_cast<std::size_t>(j + 1)] =
          clower_[static_cast<std::size_t>(j)] + cpanels[static_cast<std::size_t>(j)];
  } else {
    clower_.assign(1, 0.0);
  }
}

double Cdf1d::panel(const std::function<double(double)>& f, double a, double b) const {
  const auto& g = gl16();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double terms[16];
  for (int k = 0; k < 16; ++k)
    terms[k] = g.w[static_cast<std::size_t>(k)] * f(mid + half * g.x[static_cast<std::size_t>(k)]);
  double s = 0.0;
  for (int k = 0; k < 16; ++k) s += terms[k];
  return half * s;
}

int Cdf1d::locate(double x) const {
  const int j = static_cast<int>(std::floor((x - lo_) / h_));
  return std::clamp(j, 0, grid_ - 1);
}

double Cdf1d::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return total();
  const int j = locate(x);
  return lower_[static_cast<std::size_t>(j)] + panel(density_, xs_[static_cast<std::size_t>(j)], x);
}

double Cdf1d::survival(double x) const {
  if (x <= lo_) return total();
  if (x >= hi_) return 0.0;
  const int j = locate(x);
  return upper_[static_cast<std::size_t>(j + 1)] +
         panel(density_, x, xs_[static_cast<std::size_t>(j + 1)]);
}

double Cdf1d::companion_cdf(double x) const {
  if (!companion_) throw InvalidArgumentError("Cdf1d: no companion integrand");
  if (x <= lo_) return 0.0;
  if (x >= hi_) return companion_total();
  const int j = locate(x);
  return clower_[static_cast<std::size_t>(j)] +
         panel(companion_, xs_[static_cast<std::size_t>(j)], x);
}

double Cdf1d::quantile(double u) const {
  u = std::clamp(u, 0.0, total());
  const auto it = std::upper_bound(lower_.begin(), lower_.end(), u);
  int j = static_cast<int>(it - lower_.begin()) - 1;
  j = std::clamp(j, 0, grid_ - 1);
  double a = xs_[static_cast<std::size_t>(j)], b = xs_[static_cast<std::size_t>(j + 1)];
  double y = pchip_guess(lower_, xs_, j, u);
  if (!(y > a && y < b)) y = 0.5 * (a + b);
  const double tol = 1e-13 * u + 1e-300;
  for (int it2 = 0; it2 < 100; ++it2) {
    const double fy = cdf(y) - u;
    if (std::abs(fy) <= tol) return y;
    if (fy > 0.0)
      b = y;
    else
      a = y;
    if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) return 0.5 * (a + b);
    const double step = fy / density_(y);
    double ynext = y - step;
    if (!(ynext > a && ynext < b)) ynext = 0.5 * (a + b);
    y = ynext;
  }
  return y;
}

double Cdf1d::quantile_upper(double s) const {
  s = std::clamp(s, 0.0, total());
  // upper_ is descending in the index; gather a local window and flip it into
  // an ascending table for the cubic guess.
  const auto it = std::lower_bound(upper_.begin(), upper_.end(), s, std::greater<double>());
  int j = static_cast<int>(it - upper_.begin()) - 1;
  j = std::clamp(j, 0, grid_ - 1);
  double a = xs_[static_cast<std::size_t>(j)], b = xs_[static_cast<std::size_t>(j + 1)];
  const int klo = std::max(j - 1, 0), khi = std::min(j + 2, grid_);
  std::vector<double> uwin, ywin;
  for (int k = khi; k >= klo; --k) {
    uwin.push_back(upper_[static_cast<std::size_t>(k)]);
    ywin.push_back(xs_[static_cast<std::size_t>(k)]);
  }
  double y = pchip_guess(uwin, ywin, khi - j - 1, s);
  if (!(y > a && y < b)) y = 0.5 * (a + b);
  const double tol = 1e-13 * s + 1e-300;
  for (int it2 = 0; it2 < 100; ++it2) {
    const double fy = survival(y) - s;  // decreasing in y
    if (std::abs(fy) <= tol) return y;
    if (fy > 0.0)
      a = y;
    else
      b = y;
    if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) return 0.5 * (a + b);
    const double step = fy / density_(y);
    double ynext = y + step;
    if (!(ynext > a && ynext < b)) ynext = 0.5 * (a + b);
    y = ynext;
  }
  return y;
}

double Cdf1d::map_to(const Cdf1d& target, double x) const {
  const double f = cdf(x);
  const double s = survival(x);
  const double ratio = target.total() / total();
  if (f <= s) return target.quantile(f * ratio);
  return target.quantile_upper(s * ratio);
}

}  // namespace otlab
