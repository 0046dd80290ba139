#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

namespace bsop::cli {
namespace {

namespace fs = std::filesystem;

const std::string kReference = std::string(BSOP_SOURCE_DIR) + "/configs/reference.json";

const std::vector<std::string> kReduced{"grid.L=20", "grid.N1=128", "grid.M=1", "grid.n_ell=5"};

std::vector<std::string> reduced(std::vector<std::string> extra = {}) {
  auto o = kReduced;
  o.insert(o.end(), extra.begin(), extra.end());
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bsop_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Config, ParsesReference) {
  const auto cfg = load_config(kReference, {});
  EXPECT_NEAR(cfg.a2, 6.283185307179586, 1e-15);
  EXPECT_EQ(cfg.potential.longitudinal, LongitudinalKind::Rational);
  EXPECT_EQ(cfg.potential.q, 2.0);
  EXPECT_EQ(cfg.E, 0.1);
  EXPECT_FALSE(cfg.g.has_value());
  EXPECT_EQ(cfg.grid.N1, 256);
  EXPECT_EQ(cfg.trace.n_theta, 128);
  EXPECT_EQ(cfg.seed, 1u);
}

TEST(Config, RejectsUnknownKeys) {
  Json doc = Json::parse(read_file(kReference));
  doc["grid"]["N2"] = 4;
  EXPECT_THROW(parse_config(doc), ConfigError);
  Json doc2 = Json::parse(read_file(kReference));
  doc2["extras"] = Json::object();
  EXPECT_THROW(parse_config(doc2), ConfigError);
}

TEST(Config, OverridesParseJsonOrString) {
  const auto cfg = load_config(kReference, {"grid.N1=128", "energy.g=1.5", "trace.mode=continuation"});
  EXPECT_EQ(cfg.grid.N1, 128);
  ASSERT_TRUE(cfg.g.has_value());
  EXPECT_EQ(*cfg.g, 1.5);
  EXPECT_EQ(cfg.trace.mode, TraceMode::Continuation);
  Json doc = Json::object();
  apply_override(doc, "a.b.c=[1,2]");
  EXPECT_EQ(doc["a"]["b"]["c"].size(), 2u);
  EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(doc, "a..b=1"), ConfigError);
}

TEST(Config, EnergyAboveThresholdNamesIt) {
  try {
    load_config(kReference, {"energy.E=0.2"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("E_delta"), std::string::npos);
  }
  EXPECT_THROW(load_config(kReference, {"energy.s=5"}), ConfigError);
  EXPECT_THROW(load_config(kReference, {"grid.N1=0"}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json", {}), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = load_config(kReference, {});
  const auto b = load_config(kReference, {});
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  const auto c = load_config(kReference, {"seed=2"});
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(parse_config(to_json(a)).grid.N1, a.grid.N1);
  EXPECT_EQ(config_hash(parse_config(to_json(a))), config_hash(a));
}

TEST(Output, CsvLayout) {
  const auto dir = scratch("csv");
  {
    CsvWriter w((dir / "t.csv").string(), "0123456789abcdef", {"a", "b"});
    w.row(std::vector<double>{0.1, -2.0});
    EXPECT_THROW(w.row(std::vector<double>{1.0}), std::exception);
  }
  const auto text = read_file(dir / "t.csv");
  EXPECT_EQ(text, "# config_hash=0123456789abcdef\na,b\n1.0000000000000001e-01,-2.0000000000000000e+00\n");
  EXPECT_EQ(num(1.0), "1.0000000000000000e+00");
}

TEST(Output, ChecksCountFailures) {
  Checks c;
  c.add("x", "anchor.x", true, 1.0, 2.0, "<=");
  c.add_flag("y", "anchor.y", false);
  c.add_error("z", "anchor.z", "numerical failure", "boom");
  EXPECT_EQ(c.failures(), 2);
  EXPECT_FALSE(c.all_pass());
  EXPECT_EQ(c.json().size(), 3u);
  EXPECT_EQ(c.json()[0]["anchor"], "anchor.x");
}

TEST(Commands, TraceOnReducedGrid) {
  const auto dir = scratch("trace");
  const auto cfg = load_config(kReference, reduced({"trace.n_theta=4", "trace.g_sweep=false"}));
  const int rc = run_command("trace", cfg, {dir.string(), 2});
  EXPECT_EQ(rc, kPass);
  const auto report = Json::parse(read_file(dir / "trace_report.json"));
  EXPECT_EQ(report["status"], "pass");
  EXPECT_TRUE(fs::exists(dir / "trace_timing.json"));
  const auto csv = read_file(dir / "curve.csv");
  EXPECT_EQ(csv.rfind("# config_hash=" + config_hash(cfg), 0), 0u);
}

TEST(Commands, OffCurveGuidedIsRegimeViolation) {
  const auto dir = scratch("guided");
  const auto cfg = load_config(kReference, reduced({"guided.k=[0.5,0.0]"}));
  EXPECT_EQ(run_command("guided", cfg, {dir.string(), 1}), kRegimeViolation);
  const auto report = Json::parse(read_file(dir / "guided_report.json"));
  EXPECT_EQ(report["status"], "regime_violation");
  EXPECT_NE(report["error"]["message"].get<std::string>().find("from 1/g"), std::string::npos);
}

TEST(Commands, CouplingAboveRegimeIsRegimeViolation) {
  const auto dir = scratch("verify");
  const auto cfg = load_config(kReference, reduced({"energy.g=10"}));
  EXPECT_EQ(run_command("verify", cfg, {dir.string(), 1}), kRegimeViolation);
  const auto report = Json::parse(read_file(dir / "verify_report.json"));
  EXPECT_EQ(report["status"], "regime_violation");
}

TEST(Commands, UnknownCommandIsConfigError) {
  const auto dir = scratch("unknown");
  const auto cfg = load_config(kReference, reduced());
  EXPECT_EQ(run_command("frobnicate", cfg, {dir.string(), 1}), kConfigError);
}

TEST(Commands, DegeneratePotentialIsConfigError) {
  const auto dir = scratch("degenerate");
  const auto cfg = load_config(kReference, reduced({"potential.transverse=fourier"}));
  EXPECT_EQ(run_command("trace", cfg, {dir.string(), 1}), kConfigError);
}

}  // namespace
}  // namespace bsop::cli
