#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "otlab/measures.hpp"
#include "otlab/transport.hpp"

namespace otlab {

enum class CheckKind { identity, inequality };

const char* to_string(CheckKind k);

//! One verified inequality or identity. Margin is oriented so the asserted
//! statement is lhs >= rhs (identities assert |lhs - rhs| small); the stored
//! tolerance is absolute, resolved as tol_rel * max(|lhs|, |rhs|, 1).
struct CheckResult {
  std::string name;
  CheckKind kind = CheckKind::inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double rel_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::ordered_json params;
  double runtime_ms = 0.0;

  std::string status() const { return pass ? "pass" : "fail"; }
};

struct CheckParams {
  std::optional<double> K;
  std::optional<Vec> e;
  std::optional<double> p;
  std::optional<double> r;
  std::optional<double> t;
  std::optional<std::string> g2;      // GEN_TALAGRAND: id of the second density
  std::optional<std::string> expect;  // LSI_EXTREMAL: "equality" (default) | "strict"
};

struct CheckSpec {
  std::string name;
  std::string pair_id;
  CheckParams params;
  std::optional<double> tolerance;  // relative override
};

struct PairDesc {
  std::string id;
  std::string mu_id;
  std::string nu_id;
  MapDesc map;
};

struct Catalog {
  std::map<std::string, MeasureDesc> measures;
};

struct SuiteConfig {
  QuadPolicy quad;
  int threads = 0;  // 0 = all available cores
};

struct CheckInfo {
  std::string name;
  CheckKind kind;
  std::string assertion;  // printable statement of the check
  bool needs_g = false;
  bool needs_std_gaussian_nu = false;
  bool allow_triangular = false;  // optimal kinds are always allowed
};

const std::vector<CheckInfo>& check_registry();
const CheckInfo* find_check(const std::string& name);

//! Runs the specs in order against the named catalog. Unknown check names or
//! pair ids raise RegistryError before anything executes; a failure inside one
//! check is reported in its result and does not abort the suite. Execution may
//! be parallel across pairs; results always come back in spec order.
std::vector<CheckResult> run_suite(const Catalog& catalog, const std::vector<PairDesc>& pairs,
                                   const std::vector<CheckSpec>& specs, const SuiteConfig& cfg);

//! Direction battery used when a check quantified over unit e is run without
//! an explicit direction: coordinate axes plus the normalized diagonal.
std::vector<Vec> direction_battery(int dim);

//! Increment steps swept when INCREMENT runs without an explicit t.
const std::vector<double>& increment_steps();

}  // namespace otlab
