#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsop/fermi.hpp"
#include "bsop/potential.hpp"

namespace bsop::cli {

using Json = nlohmann::ordered_json;

// Raised for malformed or out-of-range configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceOptions {
  int n_theta = 128;
  TraceMode mode = TraceMode::RadialScan;
  bool continuation_check = false;  // also trace by continuation and compare radii
  bool g_sweep = true;
};

struct ScanOptions {
  int n_theta = 32;
  int n_radii = 9;
  double margin = 0.5;  // radial extent beyond the annulus, in annulus widths
};

struct GuidedRunOptions {
  std::optional<QuasiMomentum> k;  // else the root on the ray at theta
  double theta = 0.0;
  double decay_lengths = 30.0;
  int m_max = 6;
  bool boundary = false;  // |k| = sqrt(E) check instead of a curve node
  std::vector<double> eps_sequence{1e-2, 1e-3, 1e-4};
  bool write_state = true;
};

struct VerifyOptions {
  int n_probes = 4;
  int n_random = 4;
  int n_theta = 32;
  int guided_nodes = 4;
};

struct RunConfig {
  double a2 = 0.0;
  double a3 = 0.0;
  PotentialSpec potential;
  double E = 0.1;
  double delta = 1.0;
  double s = 6.0;
  std::optional<double> g;  // auto: 0.5 / (s c)
  double c_factor = 1.1;    // c = c_factor * measured sup ||C|| over the probe layer
  double c_probe_p_max = 0.03;
  Grid grid;
  TraceOptions trace;
  ScanOptions scan;
  GuidedRunOptions guided;
  VerifyOptions verify;
  std::uint64_t seed = 1;
};

// Parses a JSON document; unknown keys are rejected.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

// Applies "section.key=value" to the document; value is parsed as JSON when possible.
void apply_override(Json& doc, const std::string& assignment);

// Range checks independent of the potential (E below E_delta, s above 3 + sqrt(5), grid sizes).
void validate(const RunConfig& cfg);

Json to_json(const RunConfig& cfg);
// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace bsop::cli
