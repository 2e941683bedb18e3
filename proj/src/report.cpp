#include "otlab/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "otlab/version.hpp"

namespace otlab {

Report make_report(const std::vector<CheckResult>& results, const std::string& config_digest,
                   double wall_time_ms) {
  Report r;
  r.version = kVersion;
  r.config_digest = config_digest;
  r.results = results;
  r.total = static_cast<int>(results.size());
  for (const auto& res : results) (res.pass ? r.passed : r.failed) += 1;
  r.wall_time_ms = wall_time_ms;
  return r;
}

std::string digest_bytes(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016" PRIx64, h);
  return buf;
}

nlohmann::ordered_json report_json(const Report& report) {
  nlohmann::ordered_json doc;
  doc["tool"] = "otlab";
  doc["version"] = report.version;
  doc["config_digest"] = report.config_digest;
  doc["summary"] = {{"total", report.total}, {"passed", report.passed},
                    {"failed", report.failed}};
  doc["wall_time_ms"] = report.wall_time_ms;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : report.results) {
    nlohmann::ordered_json jr;
    jr["name"] = r.name;
    jr["kind"] = to_string(r.kind);
    jr["lhs"] = r.lhs;
    jr["rhs"] = r.rhs;
    jr["margin"] = r.margin;
    jr["rel_gap"] = r.rel_gap;
    jr["tolerance"] = r.tolerance;
    jr["status"] = r.status();
    jr["params"] = r.params;
    jr["runtime_ms"] = r.runtime_ms;
    arr.push_back(std::move(jr));
  }
  doc["results"] = std::move(arr);
  return doc;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string report_csv(const Report& report) {
  std::ostringstream os;
  os << "name,kind,lhs,rhs,margin,rel_gap,tolerance,status,params\n";
  for (const auto& r : report.results) {
    os << r.name << ',' << to_string(r.kind) << ',' << fmt_double(r.lhs) << ','
       << fmt_double(r.rhs) << ',' << fmt_double(r.margin) << ',' << fmt_double(r.rel_gap) << ','
       << fmt_double(r.tolerance) << ',' << r.status() << ',' << csv_quote(r.params.dump())
       << '\n';
  }
  return os.str();
}

void write_report_files(const Report& report, const std::string& json_path,
                        const std::string& csv_path) {
  {
    std::ofstream out(json_path);
    if (!out) throw Error("cannot write report to '" + json_path + "'");
    out << report_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(csv_path);
    if (!out) throw Error("cannot write report to '" + csv_path + "'");
    out << report_csv(report);
  }
}

}  // namespace otlab
