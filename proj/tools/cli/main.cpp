#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace bsop::cli;
  CLI::App app{"Birman-Schwinger operator experiments: Fermi curves, guided states and property checks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  RunOptions opts;
  long long seed = -1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  app.add_option("--set", overrides, "override section.key=value (repeatable)");
  app.add_option("--threads", opts.threads, "worker threads for independent k-points")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for random probes (overrides the config)")->check(CLI::NonNegativeNumber);

  std::string command;
  const std::pair<const char*, const char*> subcommands[] = {
      {"trace", "trace the Fermi curve"},
      {"scan", "scan g lambda1 - 1 over a polar k-grid"},
      {"guided", "build a guided state or run the |k| = sqrt(E) check"},
      {"verify", "run the property suite"},
  };
  for (const auto& [name, help] : subcommands) {
    app.add_subcommand(name, help)->callback([&command, n = name] { command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  RunConfig cfg;
  try {
    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    cfg = load_config(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const int rc = run_command(command, cfg, opts);
  std::cerr << command << ": " << (rc == kPass ? "pass" : rc == kConfigError ? "config error" : rc == kRegimeViolation ? "regime violation" : "numerical failure")
            << " (report in " << opts.out_dir << "/" << command << "_report.json)\n";
  return rc;
}
