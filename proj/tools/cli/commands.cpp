#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "output.hpp"
#include "bsop/errors.hpp"
#include "bsop/fermi.hpp"
#include "bsop/guided.hpp"
#include "bsop/parallel.hpp"

namespace bsop::cli {

namespace {

constexpr double kTwoPi = 6.283185307179586;

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return dt;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string path_in(const RunOptions& opts, const std::string& name) {
  return (std::filesystem::path(opts.out_dir) / name).string();
}

FermiContext context(const Setup& s, const RunConfig& cfg, const RunOptions& opts) {
  return {s.model, cfg.E, s.g, {}, opts.threads};
}

Json base_report(const std::string& command, const RunConfig& cfg) {
  Json r;
  r["command"] = command;
  r["config_hash"] = config_hash(cfg);
  r["config"] = to_json(cfg);
  return r;
}

void finish(CommandResult& res, const Checks& checks) {
  res.report["checks"] = checks.json();
  res.report["diagnostics"] = checks.diagnostics();
  res.report["artifacts"] = res.artifacts;
  res.report["status"] = checks.all_pass() ? "pass" : "fail";
  res.exit_code = checks.all_pass() ? kPass : kNumericalFailure;
}

// Linear interpolation of radius in theta on a closed curve.
double radius_at(const std::vector<CurveNode>& nodes, double theta) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& n : nodes) pts.push_back({n.theta, n.radius});
  std::sort(pts.begin(), pts.end());
  const auto hi = std::lower_bound(pts.begin(), pts.end(), std::make_pair(theta, -1.0));
  const auto& b = hi == pts.end() ? pts.front() : *hi;
  const auto& a = hi == pts.begin() ? pts.back() : *(hi - 1);
  double ta = a.first, tb = b.first;
  if (tb < ta) tb += kTwoPi;
  double t = theta;
  if (t < ta) t += kTwoPi;
  if (!(tb > ta)) return a.second;
  const double w = (t - ta) / (tb - ta);
  return (1.0 - w) * a.second + w * b.second;
}

}  // namespace

Setup make_setup(const RunConfig& cfg) {
  Setup s;
  s.lat = make_lattice(cfg.a2, cfg.a3);
  const auto pot = build_potential(cfg.potential, s.lat, cfg.grid);
  s.model = std::make_shared<const Model>(pot);
  s.c_measured = measured_c(s.model, cfg.E, cfg.c_probe_p_max);
  s.c_bound = cfg.c_factor * s.c_measured;
  s.g = cfg.g ? *cfg.g : 0.5 / (cfg.s * s.c_bound);
  s.annulus = make_annulus(s.lat, cfg.E, s.g, cfg.s, s.c_bound, cfg.delta);
  return s;
}

Json setup_json(const Setup& s) {
  return {{"c_measured", s.c_measured},
          {"c_bound", s.c_bound},
          {"g", s.g},
          {"g_ceiling", 1.0 / (s.annulus.s * s.c_bound)},
          {"annulus",
           {{"q_minus", s.annulus.q_minus},
            {"q_plus", s.annulus.q_plus},
            {"inner_radius", s.annulus.inner_radius},
            {"outer_radius", s.annulus.outer_radius}}}};
}

CommandResult cmd_trace(const RunConfig& cfg, const RunOptions& opts) {
  CommandResult res;
  res.report = base_report("trace", cfg);
  Stopwatch sw;
  const Setup s = make_setup(cfg);
  res.report["setup"] = setup_json(s);
  res.timing["setup"] = sw.lap();
  const auto ctx = context(s, cfg, opts);

  const auto curve = trace_curve(s.annulus, cfg.trace.n_theta, cfg.trace.mode, ctx);
  res.timing["trace"] = sw.lap();
  const auto rep = curve_report(curve, s.annulus, ctx, true);
  res.timing["report"] = sw.lap();

  Checks checks;
  checks.add("closure_gap", "curve.closed", curve.closed(), curve.closure_gap, curve.step, "<=");
  checks.add_flag("simple", "curve.simple", curve.simple);
  checks.add("winding_number", "curve.winding", curve.winding_number == 1, curve.winding_number, 1, "==");
  checks.add("max_residual", "curve.root_residual", rep.max_residual <= kRootTolerance, rep.max_residual,
             kRootTolerance, "<=");
  checks.add_flag("within_annulus", "curve.annulus_containment", rep.within_annulus);
  checks.add("min_gradient", "curve.gradient_lower_bound", rep.min_gradient > 0.0, rep.min_gradient, 0.0, ">");

  res.report["curve"] = {{"mode", to_string(curve.mode)},
                         {"nodes", curve.nodes.size()},
                         {"step", curve.step},
                         {"closure_gap", curve.closure_gap},
                         {"winding_number", curve.winding_number},
                         {"simple", curve.simple},
                         {"min_radius", rep.min_radius},
                         {"max_radius", rep.max_radius},
                         {"max_residual", rep.max_residual},
                         {"min_gradient", rep.min_gradient},
                         {"smoothness", rep.smoothness}};

  if (cfg.trace.continuation_check) {
    const auto other = trace_curve(
        s.annulus, cfg.trace.n_theta,
        cfg.trace.mode == TraceMode::RadialScan ? TraceMode::Continuation : TraceMode::RadialScan, ctx);
    double dr = 0.0;
    for (const auto& n : other.nodes) dr = std::max(dr, std::abs(radius_at(curve.nodes, n.theta) - n.radius));
    res.timing["cross_check"] = sw.lap();
    // linear interpolation error of the sampled curve bounds the achievable agreement
    checks.add("cross_method_radius", "curve.cross_method", dr <= 1e-6, dr, 1e-6, "<=");
    checks.add("cross_method_winding", "curve.winding", other.winding_number == 1, other.winding_number, 1, "==");
  }

  if (cfg.trace.g_sweep) {
    const auto gs = g_scaling(ctx, cfg.s, s.c_bound, cfg.delta, {s.g / 4, s.g / 2, s.g});
    res.timing["g_sweep"] = sw.lap();
    checks.add("g_scaling_exponent", "curve.coupling_scaling", gs.exponent >= 1.8 && gs.exponent <= 2.2,
               gs.exponent, 2.0, "in [1.8, 2.2] around");
    res.report["g_sweep"] = {{"g", gs.g}, {"offset", gs.offset}, {"exponent", gs.exponent}};
  }

  const std::string hash = config_hash(cfg);
  {
    CsvWriter csv(path_in(opts, "curve.csv"), hash, {"theta", "k2", "k3", "radius", "lambda1", "residual"});
    for (const auto& n : curve.nodes) csv.row(std::vector<double>{n.theta, n.k.k2, n.k.k3, n.radius, n.lambda1, n.residual});
  }
  res.artifacts.push_back("curve.csv");
  finish(res, checks);
  return res;
}

CommandResult cmd_scan(const RunConfig& cfg, const RunOptions& opts) {
  CommandResult res;
  res.report = base_report("scan", cfg);
  Stopwatch sw;
  const Setup s = make_setup(cfg);
  res.report["setup"] = setup_json(s);
  res.timing["setup"] = sw.lap();
  const auto ctx = context(s, cfg, opts);

  const double rin = s.annulus.inner_radius, rout = s.annulus.outer_radius, w = rout - rin;
  const double root_e = std::sqrt(cfg.E);
  const double r_lo = std::max(rin - cfg.scan.margin * w, root_e + 0.1 * (rin - root_e));
  const double r_hi = rout + cfg.scan.margin * w;
  const int nt = cfg.scan.n_theta, nr = cfg.scan.n_radii;
  std::vector<QuasiMomentum> ks;
  for (int a = 0; a < nt; ++a) {
    const double th = kTwoPi * a / nt;
    for (int b = 0; b < nr; ++b) {
      const double r = r_lo + (r_hi - r_lo) * b / (nr - 1);
      ks.push_back({r * std::cos(th), r * std::sin(th)});
    }
  }
  std::vector<LevelValue> vals(ks.size());
  parallel_for(static_cast<int>(ks.size()), opts.threads, [&](int i) { vals[i] = level_value(ctx, ks[i]); });
  res.timing["scan"] = sw.lap();

  Checks checks;
  int bracketed = 0;
  for (int a = 0; a < nt; ++a) {
    if (vals[a * nr].value > 0.0 && vals[a * nr + nr - 1].value < 0.0) ++bracketed;
  }
  checks.add("rays_with_sign_change", "scan.sign_change", bracketed == nt, bracketed, nt, "==");
  const bool symmetric = nt % 4 == 0 && cfg.a2 == cfg.a3 && cfg.potential.transverse != TransverseKind::Fourier;
  if (symmetric) {
    double d = 0.0;
    for (int a = 0; a < nt; ++a) {
      const int b = (a + nt / 4) % nt;
      for (int j = 0; j < nr; ++j) d = std::max(d, std::abs(vals[a * nr + j].lambda1 - vals[b * nr + j].lambda1));
    }
    checks.add("quarter_turn_symmetry", "scan.lattice_symmetry", d <= 1e-8, d, 1e-8, "<=");
  }
  res.report["scan"] = {{"radius_min", r_lo}, {"radius_max", r_hi}, {"n_theta", nt}, {"n_radii", nr}};

  {
    CsvWriter csv(path_in(opts, "scan.csv"), config_hash(cfg), {"k2", "k3", "lambda1", "g_lambda1_minus_1"});
    for (std::size_t i = 0; i < ks.size(); ++i) {
      csv.row(std::vector<double>{ks[i].k2, ks[i].k3, vals[i].lambda1, vals[i].value});
    }
  }
  res.artifacts.push_back("scan.csv");
  finish(res, checks);
  return res;
}

CommandResult cmd_guided(const RunConfig& cfg, const RunOptions& opts) {
  CommandResult res;
  res.report = base_report("guided", cfg);
  Stopwatch sw;
  const Setup s = make_setup(cfg);
  res.report["setup"] = setup_json(s);
  res.timing["setup"] = sw.lap();
  const auto ctx = context(s, cfg, opts);
  Checks checks;
  const std::string hash = config_hash(cfg);

  if (cfg.guided.boundary) {
    const double r = std::sqrt(cfg.E);
    const QuasiMomentum k{r * std::cos(cfg.guided.theta), r * std::sin(cfg.guided.theta)};
    const auto bc = boundary_case_check(s.model, k, cfg.E, s.g, cfg.guided.eps_sequence);
    res.timing["boundary"] = sw.lap();
    const bool all_above = std::all_of(bc.sigma_min.begin(), bc.sigma_min.end(),
                                       [&](double v) { return v >= bc.extrapolated; });
    res.report["boundary"] = {{"k", {k.k2, k.k3}},
                              {"eps", bc.eps},
                              {"sigma_min", bc.sigma_min},
                              {"tail_eps", bc.tail_eps},
                              {"tail_sigma", bc.tail_sigma},
                              {"extrapolated", bc.extrapolated},
                              {"slope", bc.slope},
                              {"fit_residual", bc.fit_residual},
                              {"conclusive", bc.conclusive},
                              {"hypotheses", bc.hypotheses},
                              {"values_above_limit", all_above},
                              {"candidate_fourier_value", bc.candidate.value},
                              {"candidate_fourier_derivative", bc.candidate.derivative}};
    if (bc.hypotheses) {
      checks.add_flag("extrapolation_conclusive", "boundary.extrapolation", bc.conclusive);
      checks.add("extrapolated_sigma_min", "boundary.no_guided_state", bc.pass(), bc.extrapolated, 0.0, ">");
    } else {
      checks.info("boundary", "potential lacks the half-space hypotheses; nothing asserted");
    }
    finish(res, checks);
    return res;
  }

  QuasiMomentum k;
  if (cfg.guided.k) {
    k = *cfg.guided.k;
  } else {
    k = radial_root(cfg.guided.theta, s.annulus, ctx).k;
  }
  const auto nv = null_vector(s.model, k, cfg.E, s.g);
  const auto st = build_guided_state(nv, *s.model, k, cfg.E, s.g, {cfg.guided.decay_lengths});
  const auto d = decay_report(st, cfg.guided.m_max);
  res.timing["guided"] = sw.lap();

  checks.add("null_residual", "guided.null_vector", nv.residual <= kNullResidual, nv.residual, kNullResidual, "<=");
  checks.add("eigen_residual", "guided.eigen_equation", st.eigen_residual <= 1e-6, st.eigen_residual, 1e-6, "<=");
  checks.add("decay_rate_relative_error", "guided.decay_rate", d.relative_error() <= 0.1, d.relative_error(), 0.1,
             "<=");
  const bool finite = std::all_of(d.moments.begin(), d.moments.end(), [](double m) { return std::isfinite(m); });
  checks.add_flag("moments_finite", "guided.regularity", finite);
  checks.info("decay_window_asymptotic", d.asymptotic);
  res.report["guided"] = {{"k", {k.k2, k.k3}},
                          {"eigenvalue_distance", nv.distance},
                          {"near_multiplicity", nv.near_multiplicity},
                          {"eigen_residual", st.eigen_residual},
                          {"consistency", st.consistency},
                          {"moments", d.moments},
                          {"decay_rate", d.decay_rate},
                          {"predicted_rate", d.predicted_rate},
                          {"grid_points", st.u.n()}};

  if (cfg.guided.write_state) {
    CsvWriter csv(path_in(opts, "guided_state.csv"), hash, {"x1", "n2", "n3", "re", "im"});
    for (int K = 0; K < st.u.values.cols(); ++K) {
      const auto& m = st.u.modes[K];
      for (int i = 0; i < st.u.n(); ++i) {
        const cplx v = st.u.values(i, K);
        csv.row(std::vector<std::string>{num(st.u.x(i)), std::to_string(m.n2), std::to_string(m.n3), num(v.real()),
                                         num(v.imag())});
      }
    }
    res.artifacts.push_back("guided_state.csv");
  }
  finish(res, checks);
  return res;
}

int run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  CommandResult res;
  try {
    if (name == "trace") {
      res = cmd_trace(cfg, opts);
    } else if (name == "scan") {
      res = cmd_scan(cfg, opts);
    } else if (name == "guided") {
      res = cmd_guided(cfg, opts);
    } else if (name == "verify") {
      res = cmd_verify(cfg, opts);
    } else {
      throw ConfigError("unknown command '" + name + "'");
    }
  } catch (const ConfigError& e) {
    res.report = base_report(name, cfg);
    res.report["status"] = "config_error";
    res.report["error"] = {{"kind", "config"}, {"message", e.what()}};
    res.exit_code = kConfigError;
  } catch (const Error& e) {
    res.report = base_report(name, cfg);
    int code = kNumericalFailure;
    switch (e.kind()) {
      case ErrorKind::RegimeViolation:
      case ErrorKind::NotOnCurve:
      case ErrorKind::HypothesisViolation:
        code = kRegimeViolation;
        break;
      case ErrorKind::Domain:
      case ErrorKind::Degenerate:
      case ErrorKind::MemoryGuard:
        code = kConfigError;
        break;
      default:
        break;
    }
    res.report["status"] = code == kRegimeViolation ? "regime_violation" : code == kConfigError ? "config_error" : "numerical_failure";
    res.report["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    res.exit_code = code;
  } catch (const std::exception& e) {
    res.report = base_report(name, cfg);
    res.report["status"] = "numerical_failure";
    res.report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    res.exit_code = kNumericalFailure;
  }
  write_json(path_in(opts, name + "_report.json"), res.report);
  Json timing = Json::object();
  for (const auto& [k, v] : res.timing) timing[k] = v;
  write_json(path_in(opts, name + "_timing.json"), {{"command", name}, {"seconds", timing}});
  return res.exit_code;
}

}  // namespace bsop::cli
