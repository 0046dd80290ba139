#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "bsop/annulus.hpp"
#include "bsop/operator.hpp"

namespace bsop::cli {

enum ExitCode { kPass = 0, kConfigError = 1, kRegimeViolation = 2, kNumericalFailure = 3 };

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
};

struct CommandResult {
  Json report;                            // deterministic content only
  std::map<std::string, double> timing;   // seconds per phase, written separately
  std::vector<std::string> artifacts;     // file names relative to out_dir
  int exit_code = kPass;
};

// Model, coupling and annulus shared by every command.
struct Setup {
  LatticeGeometry lat;
  std::shared_ptr<const Model> model;
  double c_measured = 0.0;
  double c_bound = 0.0;
  double g = 0.0;
  Annulus annulus;
};

Setup make_setup(const RunConfig& cfg);
Json setup_json(const Setup& s);

CommandResult cmd_trace(const RunConfig& cfg, const RunOptions& opts);
CommandResult cmd_scan(const RunConfig& cfg, const RunOptions& opts);
CommandResult cmd_guided(const RunConfig& cfg, const RunOptions& opts);
CommandResult cmd_verify(const RunConfig& cfg, const RunOptions& opts);

// Runs the named command, writes report.json and timing.json to out_dir and
// maps library errors to exit codes.
int run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opts);

}  // namespace bsop::cli
