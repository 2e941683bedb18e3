#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "otlab/transport.hpp"

namespace otlab {

namespace {

struct Axis {
  std::vector<double> x;
  double cell = 0.0;
};

Axis make_axis(double center, double half, int n) {
  Axis a;
  a.cell = 2.0 * half / n;
  a.x.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a.x[static_cast<std::size_t>(i)] = center - half + (i + 0.5) * a.cell;
  return a;
}

// Log-sum-exp over one tensor axis: out(i, j) = LSE_k(g(i, k) - c(j, k)),
// with g laid out (ni x nk) row-major and the cost table already transposed
// to (nj x nk) so the hot loop is contiguous.
void lse_contract(const std::vector<double>& g, int ni, int nk, const std::vector<double>& c,
                  int nj, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj), 0.0);
  for (int i = 0; i < ni; ++i) {
    const double* grow = g.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(nk);
    for (int j = 0; j < nj; ++j) {
      const double* crow = c.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(nk);
      double best = -1e308;
      for (int k = 0; k < nk; ++k) {
        const double t = grow[k] - crow[k];
        if (t > best) best = t;
      }
      double acc = 0.0;
      for (int k = 0; k < nk; ++k) {
        const double t = grow[k] - crow[k];
        if (t > best - 46.0) acc += std::exp(t - best);
      }
      out[static_cast<std::size_t>(i) * static_cast<std::size_t>(nj) +
          static_cast<std::size_t>(j)] = best + std::log(acc);
    }
  }
}

struct SinkhornState {
  int n = 0;  // atoms per axis (same for both measures)
  Axis mx1, mx2, ny1, ny2;
  std::vector<double> loga, logb;  // normalized log atom weights, (n x n)
  std::vector<double> U, V;        // dual potentials divided by epsilon
  double eps = 0.0;
  int iterations = 0;
  double final_violation = 0.0;

  mutable std::mutex mtx;
  mutable bool cache_valid = false;
  mutable Vec cache_x;
  mutable Vec cache_t;
  mutable Mat cache_dt;

  // Scratch buffers for the alternating projections.
  std::vector<double> c1_xy, c2_xy, c1_yx, c2_yx;  // axis cost tables / eps
  std::vector<double> buf_mid, buf_out, gwork;

  void build_costs() {
    // Tables are stored target-major, c[j * na + i], so the contraction's
    // source loop runs contiguously.
    auto fill = [this](const Axis& a, const Axis& b, std::vector<double>& c) {
      const int na = static_cast<int>(a.x.size()), nb = static_cast<int>(b.x.size());
      c.assign(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb), 0.0);
      for (int j = 0; j < nb; ++j)
        for (int i = 0; i < na; ++i) {
          const double d = a.x[static_cast<std::size_t>(i)] - b.x[static_cast<std::size_t>(j)];
          c[static_cast<std::size_t>(j) * static_cast<std::size_t>(na) +
            static_cast<std::size_t>(i)] = 0.5 * d * d / eps;
        }
    };
    fill(mx1, ny1, c1_xy);
    fill(mx2, ny2, c2_xy);
    fill(ny1, mx1, c1_yx);
    fill(ny2, mx2, c2_yx);
  }

  // R(j1, j2) = LSE_{i1,i2}(G(i1,i2) - c1(i1,j1) - c2(i2,j2)), two axis passes.
  void lse_2d(const std::vector<double>& g, const std::vector<double>& c1,
              const std::vector<double>& c2, std::vector<double>& out) {
    // Pass over axis 2: mid(i1, j2) = LSE_{i2}(G(i1, i2) - c2(i2, j2)).
    lse_contract(g, n, n, c2, n, buf_mid);
    // Transpose mid to (j2, i1), contract over i1, transpose back.
    gwork.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gwork[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
              static_cast<std::size_t>(i)] =
            buf_mid[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(j)];
    lse_contract(gwork, n, n, c1, n, buf_out);
    out.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int j2 = 0; j2 < n; ++j2)
      for (int j1 = 0; j1 < n; ++j1)
        out[static_cast<std::size_t>(j1) * static_cast<std::size_t>(n) +
            static_cast<std::size_t>(j2)] =
            buf_out[static_cast<std::size_t>(j2) * static_cast<std::size_t>(n) +
                    static_cast<std::size_t>(j1)];
  }

  std::vector<double> gtmp, unew, vnew;

  // One U update followed by one V update; returns the column-marginal
  // violation of the plan before the V relaxation is applied.
  double iterate(double theta) {
    const std::size_t nn = loga.size();
    gtmp.assign(nn, 0.0);
    for (std::size_t k = 0; k < nn; ++k) gtmp[k] = logb[k] + V[k];
    lse_2d(gtmp, c1_yx, c2_yx, unew);
    for (std::size_t k = 0; k < nn; ++k)
      U[k] = (1.0 - theta) * U[k] - theta * unew[k];

    for (std::size_t k = 0; k < nn; ++k) gtmp[k] = loga[k] + U[k];
    lse_2d(gtmp, c1_xy, c2_xy, vnew);
    double viol = 0.0;
    for (std::size_t k = 0; k < nn; ++k) {
      const double col = std::exp(logb[k] + V[k] + vnew[k]);
      viol = std::max(viol, std::abs(col - std::exp(logb[k])));
    }
    for (std::size_t k = 0; k < nn; ++k)
      V[k] = (1.0 - theta) * V[k] - theta * vnew[k];
    ++iterations;
    return viol;
  }
};

void barycentric(const SinkhornState& st, const std::vector<double>& logw_base, const Axis& a1,
                 const Axis& a2, double eps, const Vec& x, Vec& t_out, Mat& dt_out) {
  const int n = st.n;
  double best = -1e308;
  for (int j1 = 0; j1 < n; ++j1) {
    const double d1 = x[0] - a1.x[static_cast<std::size_t>(j1)];
    const double q1 = 0.5 * d1 * d1 / eps;
    const double* lw = logw_base.data() + static_cast<std::size_t>(j1) * static_cast<std::size_t>(n);
    for (int j2 = 0; j2 < n; ++j2) {
      const double d2 = x[1] - a2.x[static_cast<std::size_t>(j2)];
      const double w = lw[j2] - q1 - 0.5 * d2 * d2 / eps;
      if (w > best) best = w;
    }
  }
  double z = 0.0, s1 = 0.0, s2 = 0.0, s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (int j1 = 0; j1 < n; ++j1) {
    const double y1 = a1.x[static_cast<std::size_t>(j1)];
    const double d1 = x[0] - y1;
    const double q1 = 0.5 * d1 * d1 / eps;
    const double* lw = logw_base.data() + static_cast<std::size_t>(j1) * static_cast<std::size_t>(n);
    for (int j2 = 0; j2 < n; ++j2) {
      const double y2 = a2.x[static_cast<std::size_t>(j2)];
      const double d2 = x[1] - y2;
      const double w = lw[j2] - q1 - 0.5 * d2 * d2 / eps - best;
      if (w < -46.0) continue;
      const double p = std::exp(w);
      z += p;
      s1 += p * y1;
      s2 += p * y2;
      s11 += p * y1 * y1;
      s12 += p * y1 * y2;
      s22 += p * y2 * y2;
    }
  }
  t_out = Vec{s1 / z, s2 / z};
  Mat cov(2);
  cov(0, 0) = s11 / z - t_out[0] * t_out[0];
  cov(0, 1) = s12 / z - t_out[0] * t_out[1];
  cov(1, 0) = cov(0, 1);
  cov(1, 1) = s22 / z - t_out[1] * t_out[1];
  dt_out = (1.0 / eps) * cov;
}

}  // namespace

TransportMap sinkhorn_2d(const ProbabilityMeasure& mu, const ProbabilityMeasure& nu,
                         double epsilon, int max_iter, const SinkhornOptions& opts) {
  if (mu.dim != 2 || nu.dim != 2)
    throw InvalidArgumentError("sinkhorn_2d: both measures must be 2D");
  if (!(epsilon > 0.0)) throw InvalidArgumentError("sinkhorn_2d: epsilon must be positive");
  if (max_iter < 1) throw InvalidArgumentError("sinkhorn_2d: max_iter must be positive");

  auto st = std::make_shared<SinkhornState>();
  st->n = opts.grid_points;
  const int n = st->n;
  auto center_of = [](const ProbabilityMeasure& m, int k) {
    return m.gaussian ? m.gaussian->mean[k] : 0.0;
  };
  auto half_of = [&opts](const ProbabilityMeasure& m, int k) {
    return opts.box_sigmas * m.axis_scale[static_cast<std::size_t>(k)];
  };
  st->mx1 = make_axis(center_of(mu, 0), half_of(mu, 0), n);
  st->mx2 = make_axis(center_of(mu, 1), half_of(mu, 1), n);
  st->ny1 = make_axis(center_of(nu, 0), half_of(nu, 0), n);
  st->ny2 = make_axis(center_of(nu, 1), half_of(nu, 1), n);

  auto fill_weights = [n](const ProbabilityMeasure& m, const Axis& a1, const Axis& a2,
                          std::vector<double>& logw) {
    logw.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    const double logcell = std::log(a1.cell * a2.cell);
    double tot = 0.0;
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2) {
        const double lw =
            -m.potential.value(Vec{a1.x[static_cast<std::size_t>(i1)],
                                   a2.x[static_cast<std::size_t>(i2)]}) + logcell;
        logw[static_cast<std::size_t>(i1) * static_cast<std::size_t>(n) +
             static_cast<std::size_t>(i2)] = lw;
        tot += std::exp(lw);
      }
    const double logtot = std::log(tot);
    for (auto& lw : logw) lw -= logtot;
  };
  fill_weights(mu, st->mx1, st->mx2, st->loga);
  fill_weights(nu, st->ny1, st->ny2, st->logb);

  st->U.assign(st->loga.size(), 0.0);
  st->V.assign(st->loga.size(), 0.0);

  // Epsilon scaling: halve from the dominant axis variance down to the target.
  double var_cap = epsilon;
  for (int k = 0; k < 2; ++k) {
    var_cap = std::max(var_cap, mu.axis_scale[static_cast<std::size_t>(k)] *
                                    mu.axis_scale[static_cast<std::size_t>(k)]);
    var_cap = std::max(var_cap, nu.axis_scale[static_cast<std::size_t>(k)] *
                                    nu.axis_scale[static_cast<std::size_t>(k)]);
  }
  std::vector<double> schedule;
  for (double e = var_cap; e > epsilon * 1.000001; e *= 0.25) schedule.push_back(e);
  schedule.push_back(epsilon);

  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const bool final_stage = (s + 1 == schedule.size());
    if (s == 0) {
      st->eps = schedule[s];
    } else {
      const double scale = st->eps / schedule[s];
      st->eps = schedule[s];
      for (auto& u : st->U) u *= scale;
      for (auto& v : st->V) v *= scale;
    }
    st->build_costs();
    const double stage_tol = final_stage ? opts.marginal_tol : std::max(1e-2, opts.marginal_tol);
    const int stage_cap = final_stage ? max_iter - st->iterations : 80;
    // Overrelaxed updates with a snapshot safeguard. The violation is not
    // monotone under extrapolation, so only an outright explosion restores
    // the best duals and backs the extrapolation factor off.
    double theta = std::clamp(opts.overrelax, 1.0, 1.95);
    std::vector<double> best_u, best_v;
    double best_viol = 1e300;
    for (int it = 0; it < stage_cap; ++it) {
      const double viol = st->iterate(theta);
      st->final_violation = viol;
      if (viol < best_viol) {
        best_viol = viol;
        best_u = st->U;
        best_v = st->V;
      }
      if (viol < stage_tol) break;
      if (viol > 1e6 * best_viol && theta > 1.01 && !best_u.empty()) {
        st->U = best_u;
        st->V = best_v;
        theta = 1.0 + (theta - 1.0) * 0.6;
      }
      if (st->iterations >= max_iter) break;
    }
    if (std::getenv("OTLAB_SINKHORN_DEBUG"))
      std::fprintf(stderr, "sinkhorn stage eps=%g iters=%d viol=%g theta=%g\n", st->eps,
                   st->iterations, st->final_violation, theta);
    if (final_stage && st->final_violation >= opts.marginal_tol &&
        st->iterations >= max_iter) {
      throw ConvergenceFailureError(
          "sinkhorn_2d: marginal violation " + std::to_string(st->final_violation) +
              " after " + std::to_string(st->iterations) + " iterations",
          st->final_violation);
    }
  }

  // Frozen log-weights for the two barycentric projections.
  auto fwd = std::make_shared<std::vector<double>>(st->loga.size());
  auto bwd = std::make_shared<std::vector<double>>(st->loga.size());
  for (std::size_t k = 0; k < st->loga.size(); ++k) {
    (*fwd)[k] = st->logb[k] + st->V[k];
    (*bwd)[k] = st->loga[k] + st->U[k];
  }

  const double eps = st->eps;
  auto eval = [st, fwd, eps](const Vec& x, Vec& t, Mat& dt) {
    std::lock_guard<std::mutex> lock(st->mtx);
    if (st->cache_valid && st->cache_x[0] == x[0] && st->cache_x[1] == x[1]) {
      t = st->cache_t;
      dt = st->cache_dt;
      return;
    }
    barycentric(*st, *fwd, st->ny1, st->ny2, eps, x, t, dt);
    st->cache_valid = true;
    st->cache_x = x;
    st->cache_t = t;
    st->cache_dt = dt;
  };

  TransportMap t;
  t.dim = 2;
  t.kind = MapKind::entropic;
  t.accuracy = AccuracyClass::approximate;
  t.domain_radius = 1e100;
  t.value = [eval](const Vec& x) {
    Vec tv;
    Mat dt;
    eval(x, tv, dt);
    return tv;
  };
  t.jacobian = [eval](const Vec& x) {
    Vec tv;
    Mat dt;
    eval(x, tv, dt);
    return dt;
  };
  t.jacobian_dderiv = [eval](const Vec& x, const Vec& e) {
    const double h = 1e-4 * (1.0 + norm(x));
    Vec tv;
    Mat jp, jm;
    eval(x + h * e, tv, jp);
    eval(x - h * e, tv, jm);
    return (1.0 / (2.0 * h)) * (jp - jm);
  };
  t.inverse_value = [st, bwd, eps](const Vec& y) {
    Vec tv;
    Mat dt;
    barycentric(*st, *bwd, st->mx1, st->mx2, eps, y, tv, dt);
    return tv;
  };
  return t;
}

}  // namespace otlab
