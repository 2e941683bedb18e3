#include "otlab/checks.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "otlab/calculus.hpp"

namespace otlab {

const char* to_string(CheckKind k) {
  return k == CheckKind::identity ? "identity" : "inequality";
}

namespace {

double sq(double x) { return x * x; }

double pow_log(double v, double p) {
  return std::exp(p * std::log(std::max(std::abs(v), 1e-300)));
}

}  // namespace

const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> reg = {
      {"MAIN", CheckKind::inequality,
       "I_mu >= K * int ||D2Phi||_HS^2 dmu  (Fisher information controls the averaged "
       "squared Hilbert-Schmidt norm of the transport Hessian)",
       false, false, true},
      {"FISHER_ID", CheckKind::identity,
       "I_mu == int Tr[D2Phi D2W(T) D2Phi] dmu + sum_i int ||(D2Phi)^-1/2 D2Phi_xi "
       "(D2Phi)^-1/2||_HS^2 dmu  (Fisher information split for optimal maps)",
       false, false, false},
      {"TR_ID", CheckKind::identity,
       "I_mu == int Tr[DT D2W(T) DT*] dmu + sum_k int |grad ln d_k T_k|^2 dmu  "
       "(Fisher information split for triangular maps)",
       false, false, true},
      {"INCREMENT", CheckKind::inequality,
       "int (V(x+te) - V(x)) dmu >= (K/2) int |T(x+te) - T(x)|^2 dmu",
       false, false, true},
      {"GEN_TALAGRAND", CheckKind::inequality,
       "int f log(f/g) dnu >= (K/2) int |T_f - T_g|^2 f dnu  (generalized transportation "
       "inequality for two densities against nu)",
       true, false, false},
      {"TALAGRAND", CheckKind::inequality,
       "Ent_gamma(g) >= W2(gamma, g.gamma)^2 / 2  (relative entropy dominates half the "
       "squared Kantorovich distance)",
       true, true, true},
      {"INFDIM_ID", CheckKind::identity,
       "I_gamma(g) == 2 Ent_gamma(g) - 2 int log det2(D2Phi - Id) dmu + int ||D2Phi - "
       "Id||_HS^2 dmu + sum_k int Tr[(D2Phi)^-1 D2Phi_xk]^2 dmu  (dimension-free Gaussian "
       "identity with the Fredholm-Carleman determinant)",
       true, true, false},
      {"STRONG_LSI", CheckKind::inequality,
       "I_gamma(g) >= 2 Ent_gamma(g) - 2 int log det2(D2Phi - Id) dmu  (log-Sobolev with "
       "a determinant remainder)",
       true, true, false},
      {"TAL2", CheckKind::inequality,
       "I_gamma(g) >= int ||D2Phi - Id||_HS^2 dmu  (Gaussian dimension-free analog of MAIN)",
       true, true, false},
      {"LSI_EXTREMAL", CheckKind::identity,
       "I_gamma(g) == 2 Ent_gamma(g) exactly for exponential shifts g = exp(<h,x> - "
       "|h|^2/2); any other density leaves a strict gap",
       true, true, false},
      {"NONGAUSS", CheckKind::inequality,
       "2 I_nu(g) + 2 int |grad W - grad W o T|^2 dmu >= int Tr[(D2Phi - Id) D2W(T) "
       "(D2Phi - Id)] dmu  (log-concave reference measure)",
       true, false, false},
      {"QUADGROWTH", CheckKind::inequality,
       "(2/K) Ent_nu(g) + I_nu(g) >= (K/2) int ||D2Phi - Id||_HS^2 dmu  under the "
       "quadratic-growth hypothesis on W",
       true, false, false},
      {"LP_DIR", CheckKind::inequality,
       "min( ||(V_ee)+||_Lr, ((p+4)/4) ||V_e^2||_Lr ) >= K ||Phi_ee^2||_Lr with r = "
       "(p+2)/2, directional L^r estimate",
       false, false, false},
      {"CAFFARELLI", CheckKind::inequality,
       "sup (V_ee)+ >= K (sup Phi_ee)^2 over the box: the optimal map to a K-uniformly "
       "log-concave target is a 1/sqrt(K) contraction",
       false, false, false},
      {"OPNORM", CheckKind::inequality,
       "(int ||(D2V)+||^r dmu)^{1/r} >= K (int ||D2Phi||^{2r} dmu)^{1/r}  (operator-norm "
       "estimate)",
       false, false, false},
      {"THIRD_ORDER", CheckKind::inequality,
       "I_mu >= 2 sqrt(K) int [ sum_i ||D2Phi_xi||_HS^2 ]^{1/2} dmu  (third-derivative "
       "bound)",
       false, false, false},
  };
  return reg;
}

const CheckInfo* find_check(const std::string& name) {
  for (const auto& c : check_registry())
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<Vec> direction_battery(int dim) {
  std::vector<Vec> es;
  for (int i = 0; i < dim; ++i) {
    Vec e(dim);
    e[i] = 1.0;
    es.push_back(e);
  }
  if (dim > 1) {
    Vec e(dim);
    for (int i = 0; i < dim; ++i) e[i] = 1.0 / std::sqrt(static_cast<double>(dim));
    es.push_back(e);
  }
  return es;
}

const std::vector<double>& increment_steps() {
  static const std::vector<double> ts = {0.1, 0.5, 1.0};
  return ts;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.dim; ++i) a.push_back(v[i]);
  return a;
}

struct PairContext {
  const PairDesc* desc = nullptr;
  const ProbabilityMeasure* mu = nullptr;
  const ProbabilityMeasure* nu = nullptr;
  TransportMap map;
  std::string method;
  RelativeDensity g;
  QuadratureRule rule;
  bool nu_std_gaussian = false;
  double pf_error = 0.0;
  double pf_tol = 0.0;
};

class Workspace {
 public:
  Workspace(const Catalog& catalog, const SuiteConfig& cfg) : catalog_(catalog), cfg_(cfg) {}

  const ProbabilityMeasure& measure(const std::string& id) {
    std::lock_guard<std::mutex> lock(mtx_);
    auto it = measures_.find(id);
    if (it != measures_.end()) return *it->second;
    auto d = catalog_.measures.find(id);
    if (d == catalog_.measures.end())
      throw RegistryError("unknown measure id '" + id + "'");
    auto m = std::make_unique<ProbabilityMeasure>(build_measure(d->second, cfg_.quad));
    return *measures_.emplace(id, std::move(m)).first->second;
  }

  const MeasureDesc& descriptor(const std::string& id) const {
    auto d = catalog_.measures.find(id);
    if (d == catalog_.measures.end())
      throw RegistryError("unknown measure id '" + id + "'");
    return d->second;
  }

  const SuiteConfig& cfg() const { return cfg_; }

 private:
  const Catalog& catalog_;
  const SuiteConfig& cfg_;
  std::map<std::string, std::unique_ptr<ProbabilityMeasure>> measures_;
  std::mutex mtx_;
};

bool is_std_gaussian(const ProbabilityMeasure& m) {
  if (!m.gaussian) return false;
  for (int i = 0; i < m.dim; ++i)
    if (std::abs(m.gaussian->mean[i]) > 1e-12) return false;
  Mat d = m.gaussian->cov - Mat::identity(m.dim);
  return hs_norm(d) <= 1e-12;
}

PairContext build_pair_context(const PairDesc& pd, Workspace& ws) {
  PairContext pc;
  pc.desc = &pd;
  pc.mu = &ws.measure(pd.mu_id);
  pc.nu = &ws.measure(pd.nu_id);
  if (pc.mu->dim != pc.nu->dim)
    throw InvalidArgumentError("pair '" + pd.id + "': dimension mismatch");
  pc.nu_std_gaussian = is_std_gaussian(*pc.nu);

  const MeasureDesc& mu_desc = ws.descriptor(pd.mu_id);
  if (mu_desc.kind == "gaussian_shift_density") {
    if (!pc.nu_std_gaussian)
      throw InvalidArgumentError("pair '" + pd.id +
                                 "': shift densities require a standard Gaussian nu");
    pc.g = make_gaussian_shift_density(mu_desc.shift);
  } else {
    pc.g = density_ratio(*pc.mu, *pc.nu);
  }

  const double radius = std::max(pc.mu->rule.radius, pc.nu->rule.radius);
  pc.rule = tensor_rule(pc.mu->dim, ws.cfg().quad.order_for(pc.mu->dim), radius);

  pc.map = build_map(pd.map, *pc.mu, *pc.nu);
  pc.method = pd.map.method;
  pc.pf_tol = accuracy_tolerance(pc.map.accuracy);
  pc.pf_error = pushforward_error(pc.map, *pc.mu, *pc.nu, pc.rule, pc.rule);
  return pc;
}

struct CheckRun {
  const CheckInfo* info = nullptr;
  const CheckSpec* spec = nullptr;
  const PairContext* pc = nullptr;
  Workspace* ws = nullptr;
  double K = 0.0;
  double tol_rel = 0.0;
  ordered_json params;
};

bool uses_K(const std::string& name) {
  return name == "MAIN" || name == "INCREMENT" || name == "GEN_TALAGRAND" ||
         name == "QUADGROWTH" || name == "LP_DIR" || name == "CAFFARELLI" ||
         name == "OPNORM" || name == "THIRD_ORDER";
}

double default_tol_rel(const CheckInfo& info, const TransportMap& map) {
  if (info.kind == CheckKind::identity)
    return map.accuracy == AccuracyClass::exact ? 1e-8 : 1e-5;
  return map.accuracy == AccuracyClass::approximate ? 5e-2 : 1e-7;
}

CheckResult finish(const CheckRun& run, double lhs, double rhs) {
  CheckResult res;
  res.name = run.info->name;
  res.kind = run.info->kind;
  res.lhs = lhs;
  res.rhs = rhs;
  res.margin = lhs - rhs;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
  res.rel_gap = res.margin / scale;
  res.tolerance = run.tol_rel * scale;
  res.pass = res.kind == CheckKind::identity ? std::abs(res.margin) <= res.tolerance
                                             : res.margin >= -res.tolerance;
  res.params = run.params;
  return res;
}

CheckResult fail_result(const CheckRun& run, const std::string& note) {
  CheckResult res;
  res.name = run.info->name;
  res.kind = run.info->kind;
  res.pass = false;
  res.params = run.params;
  res.params["error"] = note;
  return res;
}

// ---- field helpers ------------------------------------------------------

using Field = std::function<double(const Vec&)>;

double mu_integral(const PairContext& pc, const Field& f) {
  const ProbabilityMeasure& mu = *pc.mu;
  return integrate([&](const Vec& x) { return f(x) * mu.density(x); }, pc.rule);
}

std::vector<Vec> directions_for(const CheckRun& run) {
  if (run.spec->params.e) {
    Vec e = *run.spec->params.e;
    if (e.dim != run.pc->mu->dim)
      throw InvalidArgumentError("direction e has wrong dimension");
    const double n = norm(e);
    if (!(n > 0.0)) throw InvalidArgumentError("direction e must be nonzero");
    return {(1.0 / n) * e};
  }
  return direction_battery(run.pc->mu->dim);
}

// Worst case over a parameter battery. Pass/fail accounts for every entry at
// its own tolerance. For the reported sides, equality witnesses tie at margin
// ~ 0, where quadrature noise would otherwise flip which combination gets
// reported; within a 1e-9-relative band of the minimum the first battery
// entry wins, so the reported sides are stable under grid refinement.
struct BatteryEntry {
  double lhs = 0.0;
  double rhs = 0.0;
};

CheckResult finish_battery(CheckRun& run, const std::vector<BatteryEntry>& entries,
                           const std::function<void(std::size_t)>& annotate) {
  bool all_pass = true;
  double min_margin = 1e300, worst_rel = 1e300;
  std::size_t worst_idx = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double margin = entries[i].lhs - entries[i].rhs;
    const double scale = std::max({std::abs(entries[i].lhs), std::abs(entries[i].rhs), 1.0});
    if (margin < -run.tol_rel * scale) all_pass = false;
    if (margin / scale < worst_rel) {
      worst_rel = margin / scale;
      worst_idx = i;
    }
    min_margin = std::min(min_margin, margin);
  }
  std::size_t chosen = worst_idx;
  if (all_pass) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double band = 1e-9 * std::max({std::abs(entries[i].lhs),
                                           std::abs(entries[i].rhs), 1.0});
      if (entries[i].lhs - entries[i].rhs <= min_margin + band) {
        chosen = i;
        break;
      }
    }
  }
  annotate(chosen);
  CheckResult res = finish(run, entries[chosen].lhs, entries[chosen].rhs);
  res.pass = res.pass && all_pass;
  return res;
}

// ---- the sixteen checks -------------------------------------------------

CheckResult check_main(CheckRun& run) {
  const auto& pc = *run.pc;
  const double lhs = fisher_information(*pc.mu, pc.rule);
  const double rhs =
      run.K * mu_integral(pc, [&](const Vec& x) { return sq(hs_norm(pc.map.jacobian(x))); });
  return finish(run, lhs, rhs);
}

CheckResult check_fisher_identity(CheckRun& run) {
  const auto& pc = *run.pc;
  const int d = pc.mu->dim;
  const double lhs = fisher_information(*pc.mu, pc.rule);
  const double term_tr = mu_integral(pc, [&](const Vec& x) {
    const Mat j = pc.map.jacobian(x);
    const Mat wh = pc.nu->potential.hessian(pc.map.value(x));
    return trace(j * wh * j);
  });
  const double term_third = mu_integral(pc, [&](const Vec& x) {
    const Mat j = pc.map.jacobian(x);
    const Mat b = matrix_inv_sqrt(j);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      Vec ei(d);
      ei[i] = 1.0;
      const Mat h = pc.map.jacobian_dderiv(x, ei);
      s += sq(hs_norm(b * h * b));
    }
    return s;
  });
  run.params["term_tr"] = term_tr;
  run.params["term_third"] = term_third;
  return finish(run, lhs, term_tr + term_third);
}

CheckResult check_triangular_identity(CheckRun& run) {
  const auto& pc = *run.pc;
  const int d = pc.mu->dim;
  const double lhs = fisher_information(*pc.mu, pc.rule);
  const double term_tr = mu_integral(pc, [&](const Vec& x) {
    const Mat j = pc.map.jacobian(x);
    const Mat wh = pc.nu->potential.hessian(pc.map.value(x));
    return trace(j * wh * transpose(j));
  });
  const double term_log = mu_integral(pc, [&](const Vec& x) {
    const Mat j = pc.map.jacobian(x);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      Vec ei(d);
      ei[i] = 1.0;
      const Mat dd = pc.map.jacobian_dderiv(x, ei);
      for (int k = 0; k < d; ++k) s += sq(dd(k, k) / j(k, k));
    }
    return s;
  });
  run.params["term_tr"] = term_tr;
  run.params["term_log"] = term_log;
  return finish(run, lhs, term_tr + term_log);
}

CheckResult check_increment(CheckRun& run) {
  const auto& pc = *run.pc;
  const std::vector<double> steps =
      run.spec->params.t ? std::vector<double>{*run.spec->params.t} : increment_steps();
  const std::vector<Vec> dirs = directions_for(run);
  std::vector<BatteryEntry> entries;
  std::vector<std::pair<Vec, double>> combos;
  for (const Vec& e : dirs) {
    for (double t : steps) {
      BatteryEntry b;
      b.lhs = mu_integral(pc, [&](const Vec& x) {
        const Vec xs = x + t * e;
        return pc.mu->potential.value(xs) - pc.mu->potential.value(x);
      });
      const DisplacementField disp = increment_map(pc.map, e, t);
      b.rhs = 0.5 * run.K * mu_integral(pc, disp.squared_norm);
      entries.push_back(b);
      combos.emplace_back(e, t);
    }
  }
  return finish_battery(run, entries, [&](std::size_t i) {
    run.params["e"] = vec_json(combos[i].first);
    run.params["t"] = combos[i].second;
  });
}

CheckResult check_gen_talagrand(CheckRun& run) {
  const auto& pc = *run.pc;
  RelativeDensity g2;
  TransportMap tg;
  if (run.spec->params.g2) {
    const std::string& gid = *run.spec->params.g2;
    const ProbabilityMeasure& mg = run.ws->measure(gid);
    if (mg.dim != pc.mu->dim)
      throw InvalidArgumentError("GEN_TALAGRAND: density '" + gid + "' has wrong dimension");
    const MeasureDesc& gd = run.ws->descriptor(gid);
    g2 = (gd.kind == "gaussian_shift_density") ? make_gaussian_shift_density(gd.shift)
                                               : density_ratio(mg, *pc.nu);
    MapDesc auto_desc;
    auto_desc.cdf_grid = pc.desc->map.cdf_grid;
    tg = build_map(auto_desc, mg, *pc.nu);
    run.params["g2"] = gid;
  } else {
    g2.dim = pc.mu->dim;
    g2.log_value = [](const Vec&) { return 0.0; };
    g2.grad_log = [d = pc.mu->dim](const Vec&) { return Vec(d); };
    g2.hessian_log = [d = pc.mu->dim](const Vec&) { return Mat(d); };
    tg = identity_map(pc.mu->dim);
    run.params["g2"] = "unit";
  }
  const double lhs =
      mu_integral(pc, [&](const Vec& x) { return pc.g.log_value(x) - g2.log_value(x); });
  const double rhs = 0.5 * run.K *
                     mu_integral(pc, [&](const Vec& x) {
                       return norm2(pc.map.value(x) - tg.value(x));
                     });
  return finish(run, lhs, rhs);
}

CheckResult check_talagrand(CheckRun& run) {
  const auto& pc = *run.pc;
  const double lhs = relative_entropy(pc.g, *pc.nu, pc.rule);
  const double w = wasserstein2(*pc.mu, *pc.nu, pc.map, pc.rule);
  return finish(run, lhs, 0.5 * w * w);
}

struct GaussianIdentityTerms {
  double ent = 0.0;
  double log_det2 = 0.0;  // int log det2(D2Phi - Id) dmu
  double hs_dev = 0.0;    // int ||D2Phi - Id||_HS^2 dmu
  double third = 0.0;     // sum_k int Tr[(D2Phi)^-1 D2Phi_xk]^2 dmu
};

GaussianIdentityTerms gaussian_identity_terms(const PairContext& pc, bool with_third) {
  GaussianIdentityTerms t;
  const int d = pc.mu->dim;
  t.ent = relative_entropy(pc.g, *pc.nu, pc.rule);
  t.log_det2 =
      mu_integral(pc, [&](const Vec& x) { return log_det2_fredholm(pc.map.jacobian(x), d); });
  t.hs_dev = mu_integral(pc, [&](const Vec& x) {
    return sq(hs_norm(pc.map.jacobian(x) - Mat::identity(d)));
  });
  if (with_third) {
    t.third = mu_integral(pc, [&](const Vec& x) {
      const Mat j_inv = inverse(pc.map.jacobian(x));
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        Vec ei(d);
        ei[i] = 1.0;
        const Mat m = j_inv * pc.map.jacobian_dderiv(x, ei);
        s += trace(m * m);
      }
      return s;
    });
  }
  return t;
}

CheckResult check_infdim_identity(CheckRun& run) {
  const auto& pc = *run.pc;
  const double lhs = relative_fisher(pc.g, *pc.nu, pc.rule);
  const GaussianIdentityTerms t = gaussian_identity_terms(pc, true);
  run.params["entropy"] = t.ent;
  run.params["log_det2"] = t.log_det2;
  run.params["hs_dev"] = t.hs_dev;
  run.params["third"] = t.third;
  return finish(run, lhs, 2.0 * t.ent - 2.0 * t.log_det2 + t.hs_dev + t.third);
}

CheckResult check_strong_lsi(CheckRun& run) {
  const auto& pc = *run.pc;
  const double lhs = relative_fisher(pc.g, *pc.nu, pc.rule);
  const GaussianIdentityTerms t = gaussian_identity_terms(pc, false);
  return finish(run, lhs, 2.0 * t.ent - 2.0 * t.log_det2);
}

CheckResult check_tal2(CheckRun& run) {
  const auto& pc = *run.pc;
  const double lhs = relative_fisher(pc.g, *pc.nu, pc.rule);
  const double rhs = mu_integral(pc, [&](const Vec& x) {
    return sq(hs_norm(pc.map.jacobian(x) - Mat::identity(pc.mu->dim)));
  });
  return finish(run, lhs, rhs);
}

CheckResult check_lsi_extremal(CheckRun& run) {
  const auto& pc = *run.pc;
  const std::string mode = run.spec->params.expect.value_or("equality");
  if (mode != "equality" && mode != "strict")
    throw InvalidArgumentError("LSI_EXTREMAL: expect must be 'equality' or 'strict'");
  const double lhs = relative_fisher(pc.g, *pc.nu, pc.rule);
  const double rhs = 2.0 * relative_entropy(pc.g, *pc.nu, pc.rule);
  run.params["expect"] = mode;
  CheckResult res = finish(run, lhs, rhs);
  if (mode == "strict") {
    // Extremality probe: any non-shift density must leave a clear gap.
    res.pass = res.margin >= 10.0 * res.tolerance;
  }
  return res;
}

CheckResult check_nongauss(CheckRun& run) {
  const auto& pc = *run.pc;
  const int d = pc.mu->dim;
  const double rel_fisher = relative_fisher(pc.g, *pc.nu, pc.rule);
  const double drift = mu_integral(pc, [&](const Vec& x) {
    const Vec w1 = pc.nu->potential.gradient(x);
    const Vec w2 = pc.nu->potential.gradient(pc.map.value(x));
    return norm2(w1 - w2);
  });
  const double rhs = mu_integral(pc, [&](const Vec& x) {
    const Mat dev = pc.map.jacobian(x) - Mat::identity(d);
    const Mat wh = pc.nu->potential.hessian(pc.map.value(x));
    return trace(dev * wh * dev);
  });
  run.params["relative_fisher"] = rel_fisher;
  run.params["drift_term"] = drift;
  return finish(run, 2.0 * rel_fisher + 2.0 * drift, rhs);
}

CheckResult check_quadratic_growth(CheckRun& run) {
  const auto& pc = *run.pc;
  // Numeric probe of the hypothesis
  //   W(x) - <grad W(y), x - y> - W(y) >= (K/2) |grad W(x) - grad W(y)|^2
  // on a deterministic node subsample.
  const auto& nodes = pc.rule.nodes;
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 24);
  std::vector<Vec> sample;
  for (std::size_t i = 0; i < nodes.size(); i += stride) sample.push_back(nodes[i]);
  const Potential& w = pc.nu->potential;
  for (const Vec& x : sample)
    for (const Vec& y : sample) {
      const double lhs_h = w.value(x) - dot(w.gradient(y), x - y) - w.value(y);
      const double rhs_h = 0.5 * run.K * norm2(w.gradient(x) - w.gradient(y));
      if (lhs_h - rhs_h < -1e-9 * (1.0 + std::abs(lhs_h)))
        throw Error("QUADGROWTH: quadratic-growth hypothesis fails at a sampled pair");
    }
  const double lhs = (2.0 / run.K) * relative_entropy(pc.g, *pc.nu, pc.rule) +
                     relative_fisher(pc.g, *pc.nu, pc.rule);
  const double rhs = 0.5 * run.K *
                     mu_integral(pc, [&](const Vec& x) {
                       return sq(hs_norm(pc.map.jacobian(x) - Mat::identity(pc.mu->dim)));
                     });
  return finish(run, lhs, rhs);
}

CheckResult check_lp_directional(CheckRun& run) {
  const auto& pc = *run.pc;
  const double p = run.spec->params.p.value_or(0.0);
  if (p < 0.0) throw InvalidArgumentError("LP_DIR: p must be >= 0");
  const double r = 0.5 * (p + 2.0);
  const std::vector<Vec> dirs = directions_for(run);
  std::vector<BatteryEntry> entries;
  std::vector<std::pair<double, double>> bounds;
  for (const Vec& e : dirs) {
    const double b1 = directional_lp_norm(
        [&](const Vec& x) { return std::max(dot(pc.mu->potential.hessian(x) * e, e), 0.0); },
        *pc.mu, r, pc.rule);
    const double b2 =
        0.25 * (p + 4.0) *
        directional_lp_norm(
            [&](const Vec& x) { return sq(dot(pc.mu->potential.gradient(x), e)); }, *pc.mu, r,
            pc.rule);
    BatteryEntry b;
    b.lhs = std::min(b1, b2);
    b.rhs = run.K * directional_lp_norm(
                        [&](const Vec& x) { return sq(dot(pc.map.jacobian(x) * e, e)); },
                        *pc.mu, r, pc.rule);
    entries.push_back(b);
    bounds.emplace_back(b1, b2);
  }
  run.params["p"] = p;
  run.params["r"] = r;
  return finish_battery(run, entries, [&](std::size_t i) {
    run.params["e"] = vec_json(dirs[i]);
    run.params["bound_hessian"] = bounds[i].first;
    run.params["bound_gradient"] = bounds[i].second;
  });
}

// Coordinate-wise golden-section polish of a smooth field's maximum around
// the best scanned point; makes box suprema independent of the probe density.
double polish_max(const std::function<double(const Vec&)>& f, Vec x0, double delta, double box) {
  constexpr double kGolden = 0.6180339887498949;
  double best = f(x0);
  for (int round = 0; round < 3; ++round) {
    for (int k = 0; k < x0.dim; ++k) {
      double a = std::max(x0[k] - delta, -box);
      double b = std::min(x0[k] + delta, box);
      Vec probe = x0;
      double c = b - kGolden * (b - a);
      double d2 = a + kGolden * (b - a);
      probe[k] = c;
      double fc = f(probe);
      probe[k] = d2;
      double fd = f(probe);
      for (int it = 0; it < 48; ++it) {
        if (fc > fd) {
          b = d2;
          d2 = c;
          fd = fc;
          c = b - kGolden * (b - a);
          probe[k] = c;
          fc = f(probe);
        } else {
          a = c;
          c = d2;
          fc = fd;
          d2 = a + kGolden * (b - a);
          probe[k] = d2;
          fd = f(probe);
        }
      }
      x0[k] = 0.5 * (a + b);
      probe[k] = x0[k];
      best = std::max({best, f(probe), fc, fd});
    }
    delta *= 0.1;
  }
  return best;
}

CheckResult check_caffarelli(CheckRun& run) {
  const auto& pc = *run.pc;
  const int d = pc.mu->dim;
  const std::vector<Vec> dirs = directions_for(run);
  std::vector<double> sup_phi(dirs.size(), -1e300), sup_vplus(dirs.size(), -1e300);
  std::vector<Vec> arg_phi(dirs.size(), Vec(d)), arg_vee(dirs.size(), Vec(d));

  auto absorb = [&](const Vec& x) {
    const Mat j = pc.map.jacobian(x);
    const Mat hv = pc.mu->potential.hessian(x);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const double phi_ee = dot(j * dirs[k], dirs[k]);
      const double vee = dot(hv * dirs[k], dirs[k]);
      if (phi_ee > sup_phi[k]) {
        sup_phi[k] = phi_ee;
        arg_phi[k] = x;
      }
      if (vee > sup_vplus[k]) {
        sup_vplus[k] = vee;
        arg_vee[k] = x;
      }
    }
  };
  for (const Vec& x : pc.rule.nodes) absorb(x);
  // Denser uniform probe grid against node aliasing.
  const int m = 3 * pc.rule.order + 1;
  const double R = pc.rule.radius;
  const double step = 2.0 * R / (m - 1);
  if (d == 1) {
    for (int i = 0; i < m; ++i) absorb(Vec{-R + i * step});
  } else if (d == 2) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) absorb(Vec{-R + i * step, -R + j * step});
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          absorb(Vec{-R + i * step, -R + j * step, -R + k * step});
  }
  std::vector<BatteryEntry> entries;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const Vec e = dirs[k];
    BatteryEntry b;
    b.lhs = std::max(polish_max([&](const Vec& x) { return dot(pc.mu->potential.hessian(x) * e, e); },
                                arg_vee[k], step, R),
                     0.0);
    const double phi = polish_max([&](const Vec& x) { return dot(pc.map.jacobian(x) * e, e); },
                                  arg_phi[k], step, R);
    b.rhs = run.K * sq(phi);
    entries.push_back(b);
  }
  return finish_battery(run, entries,
                        [&](std::size_t i) { run.params["e"] = vec_json(dirs[i]); });
}

CheckResult check_opnorm(CheckRun& run) {
  const auto& pc = *run.pc;
  const double r = run.spec->params.r.value_or(1.0);
  if (!(r >= 1.0)) throw InvalidArgumentError("OPNORM: r must be >= 1");
  const double lhs_int = mu_integral(pc, [&](const Vec& x) {
    return pow_log(spectral_norm(positive_part(pc.mu->potential.hessian(x))), r);
  });
  const double rhs_int = mu_integral(pc, [&](const Vec& x) {
    return pow_log(spectral_norm(pc.map.jacobian(x)), 2.0 * r);
  });
  // Informational side channel: the squared-integrand variant, no pass/fail.
  const double sq_variant = mu_integral(pc, [&](const Vec& x) {
    return sq(spectral_norm(positive_part(pc.mu->potential.hessian(x))));
  });
  run.params["r"] = r;
  run.params["info_vplus_sq_integral"] = sq_variant;
  return finish(run, std::pow(lhs_int, 1.0 / r), run.K * std::pow(rhs_int, 1.0 / r));
}

// int |g(x)| w(x) dx over [-R, R] for smooth g with isolated sign changes:
// bisected kinks, composite Gauss panels in between. The shared tensor rule
// converges only algebraically across the |.| kinks, which would leak into
// the refinement-stability contract.
double integrate_abs_weighted_1d(const std::function<double(double)>& g,
                                 const std::function<double(double)>& w, double box) {
  std::vector<double> cuts = {-box};
  const int scan = 4096;
  double prev_x = -box, prev_v = g(-box);
  for (int i = 1; i <= scan; ++i) {
    const double x = -box + 2.0 * box * i / scan;
    const double v = g(x);
    if (prev_v * v < 0.0) {
      double a = prev_x, b = x, fa = prev_v;
      for (int it = 0; it < 90; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = g(m);
        if (fa * fm <= 0.0) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_v = v;
  }
  cuts.push_back(box);

  static std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(24, gx, gw);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    const int sub = std::max(1, static_cast<int>(std::ceil((hi - lo) / 0.25)));
    for (int s = 0; s < sub; ++s) {
      const double a = lo + (hi - lo) * s / sub;
      const double b = lo + (hi - lo) * (s + 1) / sub;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      double acc = 0.0;
      for (std::size_t k = 0; k < gx.size(); ++k) {
        const double x = mid + half * gx[k];
        acc += gw[k] * std::abs(g(x)) * w(x);
      }
      total += half * acc;
    }
  }
  return total;
}

CheckResult check_third_order(CheckRun& run) {
  const auto& pc = *run.pc;
  const int d = pc.mu->dim;
  const double lhs = fisher_information(*pc.mu, pc.rule);
  double third = 0.0;
  if (d == 1) {
    third = integrate_abs_weighted_1d(
        [&](double x) {
          Vec e(1);
          e[0] = 1.0;
          return pc.map.jacobian_dderiv(Vec{x}, e)(0, 0);
        },
        [&](double x) { return pc.mu->density(Vec{x}); }, pc.rule.radius);
  } else {
    third = mu_integral(pc, [&](const Vec& x) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        Vec ei(d);
        ei[i] = 1.0;
        s += sq(hs_norm(pc.map.jacobian_dderiv(x, ei)));
      }
      return std::sqrt(s);
    });
  }
  return finish(run, lhs, 2.0 * std::sqrt(run.K) * third);
}

using CheckFn = CheckResult (*)(CheckRun&);

CheckFn check_fn(const std::string& name) {
  if (name == "MAIN") return check_main;
  if (name == "FISHER_ID") return check_fisher_identity;
  if (name == "TR_ID") return check_triangular_identity;
  if (name == "INCREMENT") return check_increment;
  if (name == "GEN_TALAGRAND") return check_gen_talagrand;
  if (name == "TALAGRAND") return check_talagrand;
  if (name == "INFDIM_ID") return check_infdim_identity;
  if (name == "STRONG_LSI") return check_strong_lsi;
  if (name == "TAL2") return check_tal2;
  if (name == "LSI_EXTREMAL") return check_lsi_extremal;
  if (name == "NONGAUSS") return check_nongauss;
  if (name == "QUADGROWTH") return check_quadratic_growth;
  if (name == "LP_DIR") return check_lp_directional;
  if (name == "CAFFARELLI") return check_caffarelli;
  if (name == "OPNORM") return check_opnorm;
  if (name == "THIRD_ORDER") return check_third_order;
  return nullptr;
}

std::string admissibility_note(const CheckInfo& info, const PairContext& pc) {
  const MapKind k = pc.map.kind;
  if (info.name == "TR_ID") {
    if (k != MapKind::triangular) return "TR_ID runs on triangular maps only";
  } else if (k == MapKind::triangular && !info.allow_triangular) {
    return info.name + " does not admit triangular maps";
  }
  if (k == MapKind::entropic && info.kind == CheckKind::identity)
    return info.name + " does not admit entropic maps (approximate accuracy)";
  if (info.needs_std_gaussian_nu && !pc.nu_std_gaussian)
    return info.name + " requires nu to be the standard Gaussian";
  if (pc.pf_error > pc.pf_tol)
    return "pushforward invariant violated: error " + std::to_string(pc.pf_error) +
           " exceeds " + std::to_string(pc.pf_tol);
  return "";
}

CheckResult execute_check(const CheckInfo& info, const CheckSpec& spec, const PairContext& pc,
                          Workspace& ws) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckRun run;
  run.info = &info;
  run.spec = &spec;
  run.pc = &pc;
  run.ws = &ws;
  run.params["pair"] = pc.desc->id;
  run.params["mu"] = pc.desc->mu_id;
  run.params["nu"] = pc.desc->nu_id;
  run.params["map"] = pc.desc->map.method;
  run.params["kind_of_map"] = to_string(pc.map.kind);
  run.params["accuracy"] = to_string(pc.map.accuracy);

  CheckResult res;
  try {
    run.tol_rel = spec.tolerance.value_or(default_tol_rel(info, pc.map));
    run.params["tol_rel"] = run.tol_rel;
    const std::string note = admissibility_note(info, pc);
    if (!note.empty()) {
      res = fail_result(run, note);
    } else {
      run.K = spec.params.K ? *spec.params.K
                            : pc.nu->potential.convexity_bound.value_or(0.0);
      if (uses_K(info.name) && !(run.K > 0.0)) {
        res = fail_result(run, "refusing to run with K <= 0");
      } else {
        if (uses_K(info.name)) run.params["K"] = run.K;
        res = check_fn(info.name)(run);
      }
    }
  } catch (const std::exception& ex) {
    res = fail_result(run, ex.what());
  }
  const auto t1 = std::chrono::steady_clock::now();
  res.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return res;
}

}  // namespace

std::vector<CheckResult> run_suite(const Catalog& catalog, const std::vector<PairDesc>& pairs,
                                   const std::vector<CheckSpec>& specs, const SuiteConfig& cfg) {
  // Validate everything before running anything.
  std::map<std::string, const PairDesc*> pair_by_id;
  for (const auto& p : pairs) {
    if (!pair_by_id.emplace(p.id, &p).second)
      throw RegistryError("duplicate pair id '" + p.id + "'");
    if (!catalog.measures.count(p.mu_id))
      throw RegistryError("pair '" + p.id + "' references unknown measure '" + p.mu_id + "'");
    if (!catalog.measures.count(p.nu_id))
      throw RegistryError("pair '" + p.id + "' references unknown measure '" + p.nu_id + "'");
  }
  for (const auto& s : specs) {
    if (!find_check(s.name)) throw RegistryError("unknown check name '" + s.name + "'");
    if (!pair_by_id.count(s.pair_id))
      throw RegistryError("check '" + s.name + "' references unknown pair '" + s.pair_id + "'");
    if (s.params.g2 && !catalog.measures.count(*s.params.g2))
      throw RegistryError("check '" + s.name + "' references unknown measure '" + *s.params.g2 +
                          "'");
  }

  Workspace ws(catalog, cfg);

  // Group work by pair, preserving first-appearance order.
  std::vector<std::string> pair_order;
  std::map<std::string, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& v = by_pair[specs[i].pair_id];
    if (v.empty()) pair_order.push_back(specs[i].pair_id);
    v.push_back(i);
  }

  // Measures are built up-front so the parallel phase only builds maps.
  for (const auto& id_specs : by_pair) {
    const PairDesc& pd = *pair_by_id[id_specs.first];
    ws.measure(pd.mu_id);
    ws.measure(pd.nu_id);
  }
  for (const auto& s : specs)
    if (s.params.g2) ws.measure(*s.params.g2);

  std::vector<CheckResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t pi = next.fetch_add(1);
      if (pi >= pair_order.size()) break;
      const PairDesc& pd = *pair_by_id[pair_order[pi]];
      const auto& indices = by_pair[pair_order[pi]];
      try {
        const PairContext pc = build_pair_context(pd, ws);
        for (std::size_t idx : indices) {
          const CheckInfo* info = find_check(specs[idx].name);
          results[idx] = execute_check(*info, specs[idx], pc, ws);
        }
      } catch (const std::exception& ex) {
        for (std::size_t idx : indices) {
          CheckResult res;
          res.name = specs[idx].name;
          res.kind = find_check(specs[idx].name)->kind;
          res.pass = false;
          res.params["pair"] = pd.id;
          res.params["error"] = std::string("pair setup failed: ") + ex.what();
          results[idx] = res;
        }
      }
    }
  };

  int nthreads = cfg.threads > 0 ? cfg.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, static_cast<int>(pair_order.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace otlab
