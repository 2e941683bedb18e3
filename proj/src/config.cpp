#include "otlab/config.hpp"

#include <fstream>
#include <set>

#include "otlab/version.hpp"

namespace otlab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what, field);
}

double need_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

int need_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<int>();
}

std::string need_string(const json& j, const std::string& field) {
  if (!j.is_string()) bad(field, "expected a string");
  return j.get<std::string>();
}

Vec parse_vec(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim)
    bad(field, "expected an array of 1..3 numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<int>(i)] = need_number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Mat parse_mat(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim) bad(field, "expected a square matrix");
  Mat m(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j.size())
      bad(field, "expected a square matrix");
    for (std::size_t k = 0; k < j.size(); ++k)
      m(static_cast<int>(i), static_cast<int>(k)) =
          need_number(j[i][k], field + "[" + std::to_string(i) + "]");
  }
  return m;
}

void check_keys(const json& j, const std::string& field, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(field + "." + it.key(), "unknown key");
}

MeasureDesc parse_measure(const json& j, const std::string& field) {
  if (!j.is_object()) bad(field, "expected an object");
  if (!j.contains("kind")) bad(field + ".kind", "missing");
  MeasureDesc d;
  d.kind = need_string(j.at("kind"), field + ".kind");
  if (d.kind == "gaussian") {
    check_keys(j, field, {"kind", "mean", "cov"});
    if (!j.contains("mean")) bad(field + ".mean", "missing");
    if (!j.contains("cov")) bad(field + ".cov", "missing");
    d.mean = parse_vec(j.at("mean"), field + ".mean");
    d.cov = parse_mat(j.at("cov"), field + ".cov");
    if (d.cov.dim != d.mean.dim) bad(field + ".cov", "dimension mismatch with mean");
  } else if (d.kind == "perturbed_gaussian") {
    check_keys(j, field, {"kind", "amplitude", "frequency"});
    if (!j.contains("amplitude")) bad(field + ".amplitude", "missing");
    d.amplitude = need_number(j.at("amplitude"), field + ".amplitude");
    d.frequency = j.contains("frequency")
                      ? need_number(j.at("frequency"), field + ".frequency")
                      : 1.0;
  } else if (d.kind == "gaussian_shift_density") {
    check_keys(j, field, {"kind", "h"});
    if (!j.contains("h")) bad(field + ".h", "missing");
    d.shift = parse_vec(j.at("h"), field + ".h");
  } else if (d.kind == "product") {
    check_keys(j, field, {"kind", "factors"});
    if (!j.contains("factors") || !j.at("factors").is_array())
      bad(field + ".factors", "expected an array of measure descriptors");
    for (std::size_t i = 0; i < j.at("factors").size(); ++i)
      d.factors.push_back(
          parse_measure(j.at("factors")[i], field + ".factors[" + std::to_string(i) + "]"));
  } else {
    bad(field + ".kind", "unknown measure kind '" + d.kind + "'");
  }
  return d;
}

MapDesc parse_map(const json& j, const std::string& field) {
  if (!j.is_object()) bad(field, "expected an object");
  check_keys(j, field, {"method", "cdf_grid", "epsilon", "max_iter", "sinkhorn_grid"});
  MapDesc d;
  if (j.contains("method")) d.method = need_string(j.at("method"), field + ".method");
  static const std::set<std::string> methods = {"auto", "brenier_1d", "gaussian", "knothe",
                                                "sinkhorn"};
  if (!methods.count(d.method)) bad(field + ".method", "unknown method '" + d.method + "'");
  if (j.contains("cdf_grid")) d.cdf_grid = need_int(j.at("cdf_grid"), field + ".cdf_grid");
  if (j.contains("epsilon")) d.epsilon = need_number(j.at("epsilon"), field + ".epsilon");
  if (j.contains("max_iter")) d.max_iter = need_int(j.at("max_iter"), field + ".max_iter");
  if (j.contains("sinkhorn_grid"))
    d.sinkhorn_grid = need_int(j.at("sinkhorn_grid"), field + ".sinkhorn_grid");
  return d;
}

CheckParams parse_params(const json& j, const std::string& field) {
  CheckParams p;
  if (!j.is_object()) bad(field, "expected an object");
  check_keys(j, field, {"K", "e", "p", "r", "t", "g", "expect"});
  if (j.contains("K")) p.K = need_number(j.at("K"), field + ".K");
  if (j.contains("e")) p.e = parse_vec(j.at("e"), field + ".e");
  if (j.contains("p")) p.p = need_number(j.at("p"), field + ".p");
  if (j.contains("r")) p.r = need_number(j.at("r"), field + ".r");
  if (j.contains("t")) p.t = need_number(j.at("t"), field + ".t");
  if (j.contains("g")) p.g2 = need_string(j.at("g"), field + ".g");
  if (j.contains("expect")) p.expect = need_string(j.at("expect"), field + ".expect");
  return p;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) bad("$", "expected a JSON object");
  check_keys(doc, "$", {"schema", "quadrature", "measures", "pairs", "checks", "output"});
  if (!doc.contains("schema")) bad("schema", "missing");
  const std::string schema = need_string(doc.at("schema"), "schema");
  if (schema != kConfigSchema)
    bad("schema", "unsupported schema '" + schema + "', expected '" + kConfigSchema + "'");

  RunConfig cfg;
  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    check_keys(q, "quadrature", {"order_1d", "order_2d", "order_3d", "radius_sigmas"});
    if (q.contains("order_1d"))
      cfg.suite.quad.order_1d = need_int(q.at("order_1d"), "quadrature.order_1d");
    if (q.contains("order_2d"))
      cfg.suite.quad.order_2d = need_int(q.at("order_2d"), "quadrature.order_2d");
    if (q.contains("order_3d"))
      cfg.suite.quad.order_3d = need_int(q.at("order_3d"), "quadrature.order_3d");
    if (q.contains("radius_sigmas"))
      cfg.suite.quad.radius_sigmas = need_number(q.at("radius_sigmas"), "quadrature.radius_sigmas");
  }

  if (!doc.contains("measures") || !doc.at("measures").is_object())
    bad("measures", "missing or not an object");
  for (auto it = doc.at("measures").begin(); it != doc.at("measures").end(); ++it)
    cfg.catalog.measures.emplace(it.key(), parse_measure(it.value(), "measures." + it.key()));

  if (!doc.contains("pairs") || !doc.at("pairs").is_array()) bad("pairs", "missing or not an array");
  for (std::size_t i = 0; i < doc.at("pairs").size(); ++i) {
    const std::string field = "pairs[" + std::to_string(i) + "]";
    const json& pj = doc.at("pairs")[i];
    if (!pj.is_object()) bad(field, "expected an object");
    check_keys(pj, field, {"id", "mu", "nu", "map"});
    PairDesc pd;
    if (!pj.contains("id")) bad(field + ".id", "missing");
    pd.id = need_string(pj.at("id"), field + ".id");
    if (!pj.contains("mu")) bad(field + ".mu", "missing");
    pd.mu_id = need_string(pj.at("mu"), field + ".mu");
    if (!pj.contains("nu")) bad(field + ".nu", "missing");
    pd.nu_id = need_string(pj.at("nu"), field + ".nu");
    if (pj.contains("map")) pd.map = parse_map(pj.at("map"), field + ".map");
    if (!cfg.catalog.measures.count(pd.mu_id))
      bad(field + ".mu", "unknown measure id '" + pd.mu_id + "'");
    if (!cfg.catalog.measures.count(pd.nu_id))
      bad(field + ".nu", "unknown measure id '" + pd.nu_id + "'");
    cfg.pairs.push_back(std::move(pd));
  }

  if (!doc.contains("checks") || !doc.at("checks").is_array())
    bad("checks", "missing or not an array");
  if (doc.at("checks").empty()) bad("checks", "at least one check is required");
  std::set<std::string> pair_ids;
  for (const auto& p : cfg.pairs) pair_ids.insert(p.id);
  for (std::size_t i = 0; i < doc.at("checks").size(); ++i) {
    const std::string field = "checks[" + std::to_string(i) + "]";
    const json& cj = doc.at("checks")[i];
    if (!cj.is_object()) bad(field, "expected an object");
    check_keys(cj, field, {"name", "pair", "params", "tolerance"});
    CheckSpec sp;
    if (!cj.contains("name")) bad(field + ".name", "missing");
    sp.name = need_string(cj.at("name"), field + ".name");
    if (!find_check(sp.name)) bad(field + ".name", "unknown check '" + sp.name + "'");
    if (!cj.contains("pair")) bad(field + ".pair", "missing");
    sp.pair_id = need_string(cj.at("pair"), field + ".pair");
    if (!pair_ids.count(sp.pair_id)) bad(field + ".pair", "unknown pair id '" + sp.pair_id + "'");
    if (cj.contains("params")) sp.params = parse_params(cj.at("params"), field + ".params");
    if (cj.contains("tolerance"))
      sp.tolerance = need_number(cj.at("tolerance"), field + ".tolerance");
    if (sp.params.g2 && !cfg.catalog.measures.count(*sp.params.g2))
      bad(field + ".params.g", "unknown measure id '" + *sp.params.g2 + "'");
    cfg.checks.push_back(std::move(sp));
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"json", "csv"});
    if (o.contains("json")) cfg.out_json = need_string(o.at("json"), "output.json");
    if (o.contains("csv")) cfg.out_csv = need_string(o.at("csv"), "output.csv");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "$");
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("malformed JSON: ") + ex.what(), "$");
  }
  return parse_config(doc);
}

}  // namespace otlab
