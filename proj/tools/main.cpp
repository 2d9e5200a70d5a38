#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "cylint/experiment.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertionFailed = 1;
constexpr int kExitInfrastructure = 2;

cylint::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return cylint::json::parse(is);
}

int cmd_validate(const std::string& config_path) {
  cylint::json config = load_json(config_path);
  auto errs = cylint::validate_config(config);
  if (errs.empty()) {
    std::cout << "ok\n";
    return kExitPass;
  }
  for (const auto& e : errs)
    std::cout << e.path << ": " << e.message << "\n";
  return kExitInfrastructure;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed_override, bool has_seed, int threads,
            const std::string& fixture_dir) {
  cylint::json config = load_json(config_path);
  if (has_seed) config["seed"] = seed_override;
  auto errs = cylint::validate_config(config);
  if (!errs.empty()) {
    for (const auto& e : errs)
      std::cerr << e.path << ": " << e.message << "\n";
    return kExitInfrastructure;
  }
  cylint::RunOutcome out =
      cylint::run_experiment(config, out_dir, threads, fixture_dir);
  for (const auto& a : out.report["assertions"])
    if (!a["pass"].get<bool>())
      std::cout << "FAIL " << a["name"].get<std::string>() << "\n";
  std::cout << (out.all_passed ? "pass" : "fail") << " ("
            << out.report["summary"]["passed"].get<int>() << " passed, "
            << out.report["summary"]["failed"].get<int>() << " failed)\n";
  return out.all_passed ? kExitPass : kExitAssertionFailed;
}

int cmd_report(const std::string& report_path) {
  cylint::json rep = load_json(report_path);
  std::cout << "kind: " << rep.value("kind", "?") << "\n";
  if (rep.contains("seeds") && rep["seeds"].contains("master"))
    std::cout << "seed: " << rep["seeds"]["master"].get<std::uint64_t>()
              << "\n";
  if (rep.contains("assertions"))
    for (const auto& a : rep["assertions"])
      std::cout << (a["pass"].get<bool>() ? "PASS " : "FAIL ")
                << a["name"].get<std::string>() << "\n";
  if (rep.contains("summary"))
    std::cout << rep["summary"]["passed"].get<int>() << " passed, "
              << rep["summary"]["failed"].get<int>() << " failed\n";
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cylint: truncated-basis verification experiments for "
               "stochastic integrals against cylindrical noise"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", report_path;
  std::string fixture_dir = "fixtures";
  std::uint64_t seed_override = 0;
  int threads = 1;

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "config JSON path")
      ->required();

  CLI::App* run = app.add_subcommand("run", "execute an experiment");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--out", out_dir, "output directory");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--threads", threads, "worker threads (never changes results)");
  run->add_option("--fixtures", fixture_dir, "fixture directory");

  CLI::App* report = app.add_subcommand("report", "pretty-print a report.json");
  report->add_option("--report", report_path, "report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInfrastructure;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed())
      return cmd_run(config_path, out_dir, seed_override,
                     seed_opt->count() > 0, threads, fixture_dir);
    return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfrastructure;
  }
}
