#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "otlab/config.hpp"
#include "otlab/report.hpp"

using namespace otlab;
using nlohmann::json;

namespace {

json minimal_config() {
  return json::parse(R"({
    "schema": "otlab-config/1",
    "quadrature": {"order_1d": 200, "order_2d": 80, "order_3d": 24, "radius_sigmas": 12.0},
    "measures": {
      "std1": {"kind": "gaussian", "mean": [0.0], "cov": [[1.0]]},
      "g4":   {"kind": "gaussian", "mean": [0.0], "cov": [[4.0]]},
      "s1":   {"kind": "gaussian_shift_density", "h": [1.0]},
      "pp":   {"kind": "product", "factors": [
                 {"kind": "gaussian", "mean": [0.0], "cov": [[2.25]]},
                 {"kind": "perturbed_gaussian", "amplitude": 0.3}]}
    },
    "pairs": [
      {"id": "p1", "mu": "g4", "nu": "std1", "map": {"method": "auto"}},
      {"id": "p2", "mu": "s1", "nu": "std1", "map": {"method": "gaussian"}}
    ],
    "checks": [
      {"name": "MAIN", "pair": "p1"},
      {"name": "TALAGRAND", "pair": "p2"},
      {"name": "MAIN", "pair": "p1", "params": {"K": 4.0}}
    ],
    "output": {"json": "r.json", "csv": "r.csv"}
  })");
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field;
  }
  return "";
}

}  // namespace

TEST_CASE("a valid config parses") {
  const RunConfig cfg = parse_config(minimal_config());
  CHECK(cfg.suite.quad.order_1d == 200);
  CHECK(cfg.catalog.measures.size() == 4);
  CHECK(cfg.pairs.size() == 2);
  CHECK(cfg.checks.size() == 3);
  CHECK(cfg.checks[2].params.K.has_value());
  CHECK(cfg.out_json == "r.json");
}

TEST_CASE("diagnostics name the offending field") {
  json doc = minimal_config();
  doc.erase("schema");
  CHECK(field_of(doc) == "schema");

  doc = minimal_config();
  doc["schema"] = "otlab-config/99";
  CHECK(field_of(doc) == "schema");

  doc = minimal_config();
  doc["measures"]["bad"] = {{"kind", "cauchy"}};
  CHECK(field_of(doc) == "measures.bad.kind");

  doc = minimal_config();
  doc["measures"]["std1"].erase("cov");
  CHECK(field_of(doc) == "measures.std1.cov");

  doc = minimal_config();
  doc["pairs"][0]["mu"] = "ghost";
  CHECK(field_of(doc) == "pairs[0].mu");

  doc = minimal_config();
  doc["checks"][0]["name"] = "NOT_A_CHECK";
  CHECK(field_of(doc) == "checks[0].name");

  doc = minimal_config();
  doc["checks"][1]["pair"] = "ghost";
  CHECK(field_of(doc) == "checks[1].pair");

  doc = minimal_config();
  doc["checks"][0]["params"] = {{"zeta", 1.0}};
  CHECK(field_of(doc) == "checks[0].params.zeta");

  doc = minimal_config();
  doc["pairs"][0]["map"]["method"] = "teleport";
  CHECK(field_of(doc) == "pairs[0].map.method");

  doc = minimal_config();
  doc["checks"] = json::array();
  CHECK(field_of(doc) == "checks");

  doc = minimal_config();
  doc["extra_top_level"] = 1;
  CHECK(field_of(doc) == "$.extra_top_level");
}

TEST_CASE("load_config rejects missing and malformed files") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
  const std::string path = "malformed_test_config.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("running a parsed config produces a consistent report") {
  RunConfig cfg = parse_config(minimal_config());
  cfg.suite.threads = 1;
  const auto results = run_suite(cfg.catalog, cfg.pairs, cfg.checks, cfg.suite);
  REQUIRE(results.size() == 3);
  CHECK(results[0].pass);   // MAIN on g4 -> std1
  CHECK(results[1].pass);   // TALAGRAND on the shift density
  CHECK(!results[2].pass);  // MAIN with K inflated to 4

  const Report report = make_report(results, digest_bytes("cfg"), 12.5);
  CHECK(report.total == 3);
  CHECK(report.passed == 2);
  CHECK(report.failed == 1);

  const auto doc = report_json(report);
  CHECK(doc["summary"]["total"] == 3);
  CHECK(doc["results"].size() == 3);
  CHECK(doc["results"][0]["status"] == "pass");
  CHECK(doc["results"][2]["status"] == "fail");

  // reports are deterministic modulo the wall-time field
  const auto again = run_suite(cfg.catalog, cfg.pairs, cfg.checks, cfg.suite);
  Report r2 = make_report(again, digest_bytes("cfg"), 99.0);
  auto d1 = report_json(report);
  auto d2 = report_json(r2);
  d1["wall_time_ms"] = 0.0;
  d2["wall_time_ms"] = 0.0;
  for (auto& res : d1["results"]) res["runtime_ms"] = 0.0;
  for (auto& res : d2["results"]) res["runtime_ms"] = 0.0;
  CHECK(d1.dump() == d2.dump());

  // CSV carries the same values in the fixed column order
  const std::string csv = report_csv(report);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "name,kind,lhs,rhs,margin,rel_gap,tolerance,status,params");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", results[0].lhs);
  CHECK(csv.find(buf) != std::string::npos);
}

TEST_CASE("digest is stable and content-sensitive") {
  CHECK(digest_bytes("abc") == digest_bytes("abc"));
  CHECK(digest_bytes("abc") != digest_bytes("abd"));
  CHECK(digest_bytes("").rfind("fnv1a:", 0) == 0);
}

TEST_CASE("threaded and sequential runs agree bitwise") {
  RunConfig cfg = parse_config(minimal_config());
  cfg.suite.threads = 1;
  const auto seq = run_suite(cfg.catalog, cfg.pairs, cfg.checks, cfg.suite);
  cfg.suite.threads = 4;
  const auto par = run_suite(cfg.catalog, cfg.pairs, cfg.checks, cfg.suite);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].lhs == par[i].lhs);
    CHECK(seq[i].rhs == par[i].rhs);
    CHECK(seq[i].margin == par[i].margin);
    CHECK(seq[i].pass == par[i].pass);
  }
}
