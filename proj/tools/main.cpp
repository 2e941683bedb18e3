#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "otlab/config.hpp"
#include "otlab/report.hpp"
#include "otlab/version.hpp"

namespace {

int resolve_threads() {
  // OTLAB_THREADS caps worker parallelism; default is all available cores.
  if (const char* env = std::getenv("OTLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;
}

int cmd_list() {
  for (const auto& c : otlab::check_registry())
    std::cout << c.name << "  [" << otlab::to_string(c.kind) << "]  " << c.assertion << "\n";
  return 0;
}

int cmd_describe(const std::string& name) {
  const otlab::CheckInfo* info = otlab::find_check(name);
  if (!info) {
    std::cerr << "error: unknown check '" << name << "'\n";
    return 2;
  }
  std::cout << info->name << " (" << otlab::to_string(info->kind) << ")\n";
  std::cout << "  asserts: " << info->assertion << "\n";
  std::cout << "  parameters:\n";
  std::cout << "    K       uniform convexity constant of nu's potential "
               "(default: nu's convexity bound)\n";
  if (info->name == "LP_DIR")
    std::cout << "    p       exponent p >= 0, r = (p+2)/2 (default 0)\n";
  if (info->name == "OPNORM") std::cout << "    r       norm exponent r >= 1 (default 1)\n";
  if (info->name == "INCREMENT")
    std::cout << "    t       increment step (default sweep 0.1, 0.5, 1.0)\n";
  if (info->name == "LP_DIR" || info->name == "CAFFARELLI" || info->name == "INCREMENT")
    std::cout << "    e       unit direction (default battery: axes plus diagonal)\n";
  if (info->name == "GEN_TALAGRAND")
    std::cout << "    g       measure id of the second density (default: the unit density)\n";
  if (info->name == "LSI_EXTREMAL")
    std::cout << "    expect  'equality' (shift densities) or 'strict' (gap probe)\n";
  if (info->needs_std_gaussian_nu)
    std::cout << "  requires: nu is the standard Gaussian\n";
  return 0;
}

int cmd_run(const std::string& config_path, std::string out_json, std::string out_csv) {
  otlab::RunConfig cfg;
  try {
    cfg = otlab::load_config(config_path);
  } catch (const otlab::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  }
  cfg.suite.threads = resolve_threads();
  if (!out_json.empty()) cfg.out_json = out_json;
  if (!out_csv.empty()) cfg.out_csv = out_csv;

  std::ifstream raw(config_path, std::ios::binary);
  std::ostringstream bytes;
  bytes << raw.rdbuf();
  const std::string digest = otlab::digest_bytes(bytes.str());

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<otlab::CheckResult> results;
  try {
    results = otlab::run_suite(cfg.catalog, cfg.pairs, cfg.checks, cfg.suite);
  } catch (const otlab::RegistryError& ex) {
    std::cerr << "registry error: " << ex.what() << "\n";
    return 2;
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double wall = std::chrono::duration<double, std::milli>(t1 - t0).count();

  const otlab::Report report = otlab::make_report(results, digest, wall);
  otlab::write_report_files(report, cfg.out_json, cfg.out_csv);

  for (const auto& r : report.results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  pair="
              << (r.params.contains("pair") ? r.params["pair"].get<std::string>() : "?")
              << "  margin=" << r.margin << "  rel_gap=" << r.rel_gap;
    if (!r.pass && r.params.contains("error"))
      std::cout << "  error=" << r.params["error"].get<std::string>();
    std::cout << "\n";
  }
  std::cout << "summary: " << report.passed << "/" << report.total << " passed, "
            << report.failed << " failed\n";
  std::cout << "reports: " << cfg.out_json << ", " << cfg.out_csv << "\n";
  return report.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otlab: transport-map regularity and transportation-inequality checks"};
  app.set_version_flag("--version", std::string(otlab::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a check suite from a config file");
  std::string config_path, out_json, out_csv;
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--out-json", out_json, "override the JSON report path");
  run->add_option("--out-csv", out_csv, "override the CSV report path");

  auto* list = app.add_subcommand("list", "list registered checks");

  auto* describe = app.add_subcommand("describe", "describe one check");
  std::string check_name;
  describe->add_option("name", check_name, "check name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_json, out_csv);
    if (list->parsed()) return cmd_list();
    if (describe->parsed()) return cmd_describe(check_name);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}
