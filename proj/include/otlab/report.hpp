#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "otlab/checks.hpp"

namespace otlab {

//! Aggregated run output. Everything but wall_time_ms and tool version is a
//! deterministic function of the config.
struct Report {
  std::string version;
  std::string config_digest;
  std::vector<CheckResult> results;
  int total = 0;
  int passed = 0;
  int failed = 0;
  double wall_time_ms = 0.0;
};

Report make_report(const std::vector<CheckResult>& results, const std::string& config_digest,
                   double wall_time_ms);

//! FNV-1a 64-bit digest of raw bytes, rendered as "fnv1a:<hex>".
std::string digest_bytes(const std::string& bytes);

nlohmann::ordered_json report_json(const Report& report);
std::string report_csv(const Report& report);

void write_report_files(const Report& report, const std::string& json_path,
                        const std::string& csv_path);

}  // namespace otlab
