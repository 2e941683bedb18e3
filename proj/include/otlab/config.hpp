#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "otlab/checks.hpp"

namespace otlab {

//! Parsed run configuration (see configs/default.json for the schema).
struct RunConfig {
  SuiteConfig suite;
  Catalog catalog;
  std::vector<PairDesc> pairs;
  std::vector<CheckSpec> checks;
  std::string out_json = "report.json";
  std::string out_csv = "report.csv";
};

//! Parses and validates a config document. Violations raise ConfigError with
//! the offending field named.
RunConfig parse_config(const nlohmann::json& doc);

//! Reads, parses and validates a config file.
RunConfig load_config(const std::string& path);

}  // namespace otlab
