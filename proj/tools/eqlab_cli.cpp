// eqlab: run an experiment config and write CSV/JSON results.
//
//   eqlab <scenario> --config PATH [--out DIR] [--seed U64] [--format csv|json|both] [--jobs N]
//
// Exit status: 0 success, 1 unwritable output, 2 config error, 3 numerical
// failure threshold exceeded, 4 conjecture anomaly. LAB_LOG sets the log level
// (trace, debug, info, warn, error, off).

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "eqlab/lab/config.hpp"
#include "eqlab/lab/emit.hpp"
#include "eqlab/lab/runner.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("eqlab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LAB_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("LAB_LOG: unknown level '{}', keeping 'warn'", env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace eqlab::lab;
  setup_logging();

  CLI::App app{"Equilibrium-manifold geometry experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format_name = "both";
  int jobs = 1;
  app.add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: config 'output', else 'results')");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  for (const std::string& name : scenario_names()) app.add_subcommand(name, "Run the " + name + " scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string scenario_name = app.get_subcommands().front()->get_name();
  const Scenario scenario = *scenario_from_string(scenario_name);

  ExperimentConfig cfg;
  RunResult result;
  try {
    cfg = load_config(config_path, scenario);
    if (seed) set_seed(cfg, *seed);
    spdlog::info("running {} from {} (seed {}, jobs {})", scenario_name, config_path, cfg.seed, jobs);
    result = run(cfg, RunOptions{jobs});
  } catch (const eqlab::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const eqlab::Error& e) {
    spdlog::error("{}", e.what());
    return kExitNumerical;
  }

  const std::string dir = !out_dir.empty() ? out_dir : cfg.output.value_or("results");
  try {
    for (const std::string& path : write_outputs(dir, result, cfg, *format_from_string(format_name)))
      std::cout << path << '\n';
  } catch (const eqlab::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }

  spdlog::info("{} rows, {} failed", result.rows.size(), result.failures);
  if (result.exit_code == kExitNumerical)
    spdlog::error("failed-row fraction {} exceeds the threshold", result.summary["failure_fraction"].get<double>());
  if (result.exit_code == kExitAnomaly) spdlog::error("conjecture anomaly: {}", result.summary["cell"].dump());
  return result.exit_code;
}
