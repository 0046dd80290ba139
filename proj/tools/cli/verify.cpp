#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "commands.hpp"
#include "output.hpp"
#include "bsop/errors.hpp"
#include "bsop/fermi.hpp"
#include "bsop/guided.hpp"
#include "bsop/lap.hpp"
#include "bsop/parallel.hpp"
#include "bsop/spectral.hpp"

namespace bsop::cli {

namespace {

constexpr double kTwoPi = 6.283185307179586;

QuasiMomentum polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

std::vector<double> nodes_x(const Grid& g) {
  std::vector<double> x;
  for (int i = 0; i < g.N1; ++i) x.push_back(g.x(i));
  return x;
}

Eigen::VectorXcd random_state(const Model& m, std::mt19937_64& rng) {
  const Eigen::MatrixXcd v = smooth_random_channels(nodes_x(m.grid()), m.nm(), rng);
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
}

// Runs one group; library errors become failed entries and regime errors are remembered.
class Suite {
 public:
  Suite(Checks& checks, std::map<std::string, double>& timing) : checks_(checks), timing_(timing) {}

  void group(const std::string& name, const std::function<void()>& body) { group(name, name, body); }

  void group(const std::string& name, const std::string& anchor, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const Error& e) {
      checks_.add_error(name, anchor, to_string(e.kind()), e.what());
      if (e.kind() == ErrorKind::RegimeViolation || e.kind() == ErrorKind::NotOnCurve) regime_ = true;
    }
    timing_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  bool regime() const { return regime_; }

 private:
  Checks& checks_;
  std::map<std::string, double>& timing_;
  bool regime_ = false;
};

}  // namespace

CommandResult cmd_verify(const RunConfig& cfg, const RunOptions& opts) {
  CommandResult res;
  res.report["command"] = "verify";
  res.report["config_hash"] = config_hash(cfg);
  res.report["config"] = to_json(cfg);
  Checks checks;
  Suite suite(checks, res.timing);
  std::mt19937_64 rng(cfg.seed);
  const double E = cfg.E;
  const auto lat = make_lattice(cfg.a2, cfg.a3);
  const int np = cfg.verify.n_probes;

  suite.group("geometry", [&] {
    const double dual = std::max(std::abs(lat.a2_len * lat.b2_len - kTwoPi), std::abs(lat.a3_len * lat.b3_len - kTwoPi));
    checks.add("dual_lengths", "geometry.duality", dual <= 1e-14, dual, 1e-14, "<=");
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    double branch = 0.0, gap = -1e300;
    const auto modes = enumerate_modes(lat, 3);
    const double ed = energy_threshold(lat, cfg.delta);
    for (int i = 0; i < 64; ++i) {
      const QuasiMomentum k = from_cell_coords(lat, {U(rng), U(rng)});
      const double eps = 0.2 * U(rng);
      for (const auto& K : modes) {
        const double q = shifted_norm_sq(k, K);
        if (std::abs(q - E) < 1e-10 && eps == 0.0) continue;
        const cplx p = dispersion_root(q, E, eps).value();
        const cplx z(E - q, eps);
        branch = std::max(branch, std::abs(p * p - z) / std::max(1.0, std::abs(z)));
        if (!K.is_zero()) gap = std::max(gap, E - q + cfg.delta * ed);
      }
    }
    checks.add("dispersion_branch", "geometry.branch", branch <= 1e-13, branch, 1e-13, "<=");
    checks.add("nonzero_modes_closed", "geometry.threshold_gap", gap < 0.0, gap, 0.0, "<");
    const auto s4 = summability_sum(lat, {0.1, 0.05}, E, 3.0, 4, cfg.delta);
    const auto s8 = summability_sum(lat, {0.1, 0.05}, E, 3.0, 8, cfg.delta);
    checks.add("summability_tail", "geometry.summability", s8.value - s4.value <= s4.tail_bound,
               s8.value - s4.value, s4.tail_bound, "<=");
  });

  Setup setup;
  bool have_setup = false;
  suite.group("setup", "spectral.coupling_regime", [&] {
    setup = make_setup(cfg);
    have_setup = true;
    res.report["setup"] = setup_json(setup);
  });
  if (!have_setup) {
    res.report["checks"] = checks.json();
    res.report["diagnostics"] = checks.diagnostics();
    res.report["status"] = suite.regime() ? "regime_violation" : "fail";
    res.exit_code = suite.regime() ? kRegimeViolation : kNumericalFailure;
    return res;
  }
  const auto& model = setup.model;
  const auto& ann = setup.annulus;
  const double g = setup.g;
  const double r_mid = 0.5 * (ann.inner_radius + ann.outer_radius);
  const FermiContext ctx{model, E, g, {}, opts.threads};

  suite.group("potential", [&] {
    const double nd = std::abs(model->potential().quadrature_norm() - 1.0);
    checks.add("normalization", "potential.unit_norm", nd <= 1e-10, nd, 1e-10, "<=");
    const auto dm = decay_margin(cfg.potential);
    checks.add("decay_exponent", "potential.decay", dm.pass, dm.exponent, 1.5, ">");
  });

  suite.group("operator", [&] {
    const QuasiMomentum k = polar(r_mid, 0.3);
    const auto G = assemble_gamma(model, k, E, 0.0);
    double dual = 0.0;
    for (int i = 0; i < cfg.verify.n_random; ++i) {
      const auto v = random_state(*model, rng);
      dual = std::max(dual, (G.apply(v) - apply_gamma_spectral(*model, v, k, E)).norm() / v.norm());
    }
    checks.add("dual_path", "operator.dual_path", dual <= 1e-6, dual, 1e-6, "<=");
    double adj = 0.0;
    for (double eps : {0.0, 0.01, 0.1}) {
      const auto Gp = assemble_gamma(model, k, E, eps);
      const auto Gm = assemble_gamma(model, k, E, -eps);
      adj = std::max(adj, (Gp.adjoint() - Gm).frobenius() / Gp.frobenius());
    }
    checks.add("adjoint_symmetry", "operator.adjoint", adj <= 1e-10, adj, 1e-10, "<=");
    const auto d = assemble_decomposition(model, k, E, 0.0);
    const double rec = (G - (d.Lambda * d.P + d.C)).frobenius() / G.frobenius();
    checks.add("decomposition", "operator.rank_one_split", rec <= 1e-12, rec, 1e-12, "<=");
    const double cb = bound_c(model->potential(), cfg.delta);
    checks.add("c_below_bound", "operator.c_bound", d.C.frobenius() <= cb, d.C.frobenius(), cb, "<=");
    // eps well below p_I^2 at this probe
    const auto lr = limit_rates(model, polar(std::sqrt(2.0 * E), 0.3), E, {1e-3, 1e-4, 1e-5});
    checks.add("rate_evanescent", "operator.limit_rate", std::abs(lr.slope_plus - 1.0) <= 0.2, lr.slope_plus, 1.0,
               "within 0.2 of");
  });

  suite.group("spectral", [&] {
    double worst_inv = 0.0, worst_sep = 1e300, bracket_in = 1e300, bracket_out = -1e300, fh_err = 0.0, overlap = 1.0;
    bool sep_pass = true;
    const double bracket = 1.0 / (cfg.s * (cfg.s - 1.0));
    for (int j = 0; j < np; ++j) {
      const double th = kTwoPi * (j + 0.5) / np;
      const auto sep = separation_check(model, polar(r_mid, th), 0.0, ann, setup.c_bound);
      sep_pass = sep_pass && sep.pass();
      worst_sep = std::min(worst_sep, std::abs(sep.Lambda) / (4.0 * sep.c_measured));
      const double pp = 2.0 * ann.q_plus * g, pm = 2.0 * ann.q_minus * g;
      for (double r : {std::sqrt(E + pp * pp), std::sqrt(E - pm * pm)}) {
        const auto ib = outside_annulus_bound(model, polar(r, th), 0.0, ann);
        worst_inv = std::max(worst_inv, ib.invertible ? ib.inv_norm : INFINITY);
      }
      const auto rr = radial_root(th, ann, ctx);
      bracket_in = std::min(bracket_in, rr.value_inner);
      bracket_out = std::max(bracket_out, rr.value_outer);

      const QuasiMomentum k = polar(r_mid, th);
      const auto fh = fh_gradient(model, k, E);
      const double step = 1e-3 * (r_mid - std::sqrt(E));
      std::array<double, 2> fd{};
      for (int c = 0; c < 2; ++c) {
        QuasiMomentum a = k, b = k;
        (c == 0 ? a.k2 : a.k3) += step;
        (c == 0 ? b.k2 : b.k3) -= step;
        EigOptions o;
        o.second = false;
        const double la = leading_eig(assemble_gamma(model, a, E, 0.0), o).lambda1.real();
        const double lb = leading_eig(assemble_gamma(model, b, E, 0.0), o).lambda1.real();
        fd[c] = (la - lb) / (2.0 * step);
      }
      fh_err = std::max(fh_err, std::hypot(fh.grad[0] - fd[0], fh.grad[1] - fd[1]) / fh.norm());
      overlap = std::min(overlap, overlap_bound(fh.psi1, *model, cfg.s).overlap);
    }
    checks.add_flag("disk_separation", "spectral.separation", sep_pass);
    checks.info("lambda_over_4c_min", worst_sep);
    const double bound = 2.0 * cfg.s * (cfg.s - 1.0);
    checks.add("inverse_norm_outside", "spectral.outside_bound", worst_inv <= bound, worst_inv, bound, "<=");
    checks.add("sign_inner", "spectral.sign_bracket", bracket_in > bracket, bracket_in, bracket, ">");
    checks.add("sign_outer", "spectral.sign_bracket", bracket_out < -bracket, bracket_out, -bracket, "<");
    checks.add("fh_vs_fd", "spectral.gradient", fh_err <= 1e-4, fh_err, 1e-4, "<=");
    const double ob = overlap_lower_bound(cfg.s);
    checks.add("overlap", "spectral.overlap", overlap >= ob, overlap, ob, ">=");
  });

  FermiCurve curve;
  suite.group("fermi", [&] {
    curve = trace_curve(ann, cfg.verify.n_theta, TraceMode::RadialScan, ctx);
    const auto rep = curve_report(curve, ann, ctx, false);
    checks.add("closure_gap", "curve.closed", curve.closed(), curve.closure_gap, curve.step, "<=");
    checks.add_flag("simple", "curve.simple", curve.simple);
    checks.add("winding_number", "curve.winding", curve.winding_number == 1, curve.winding_number, 1, "==");
    checks.add("max_residual", "curve.root_residual", rep.max_residual <= kRootTolerance, rep.max_residual,
               kRootTolerance, "<=");
    checks.add_flag("within_annulus", "curve.annulus_containment", rep.within_annulus);
    const auto gs = g_scaling(ctx, cfg.s, setup.c_bound, cfg.delta, {g / 4, g / 2, g});
    checks.add("g_scaling_exponent", "curve.coupling_scaling", gs.exponent >= 1.8 && gs.exponent <= 2.2,
               gs.exponent, 2.0, "in [1.8, 2.2] around");
  });

  suite.group("guided", [&] {
    if (curve.nodes.empty()) throw Error(ErrorKind::Tracing, "no curve nodes to build guided states from");
    const int n = std::min<int>(cfg.verify.guided_nodes, static_cast<int>(curve.nodes.size()));
    double res_max = 0.0, decay_max = 0.0;
    bool finite = true;
    for (int j = 0; j < n; ++j) {
      const auto& node = curve.nodes[j * curve.nodes.size() / n];
      const auto nv = null_vector(model, node.k, E, g);
      const auto st = build_guided_state(nv, *model, node.k, E, g);
      const auto d = decay_report(st, 6);
      res_max = std::max(res_max, st.eigen_residual);
      decay_max = std::max(decay_max, d.relative_error());
      for (double m : d.moments) finite = finite && std::isfinite(m);
    }
    checks.add("eigen_residual", "guided.eigen_equation", res_max <= 1e-6, res_max, 1e-6, "<=");
    checks.add("decay_rate_relative_error", "guided.decay_rate", decay_max <= 0.1, decay_max, 0.1, "<=");
    checks.add_flag("moments_finite", "guided.regularity", finite);
  });

  suite.group("lap", [&] {
    const Grid& gr = model->grid();
    const LapGrid lg(lat, gr.L, gr.N1, gr.n_ell);
    const QuasiMomentum kp = polar(r_mid, 0.2);
    Eigen::MatrixXcd u(gr.N1, lg.modes().size());
    std::normal_distribution<double> N(0.0, 1.0);
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = cplx(N(rng), N(rng));
    const double pd = parseval_defect(u, lg, kp);
    checks.add("parseval", "transform.parseval", pd <= 1e-10, pd, 1e-10, "<=");
    const double rt = (igft(gft(u, lg, kp), lg, kp) - u).norm() / u.norm();
    checks.add("round_trip", "transform.unitary", rt <= 1e-12, rt, 1e-12, "<=");

    const auto xs = nodes_x(gr);
    const Channels f{gr.h(), gr.x(0), model->modes(), smooth_random_channels(xs, model->nm(), rng)};
    const Channels v{gr.h(), gr.x(0), model->modes(), smooth_random_channels(xs, model->nm(), rng)};
    const double id = resolvent_identity_defect(f, kp, cplx(E, 0.1));
    checks.add("resolvent_identity", "resolvent.identity", id <= 1e-8, id, 1e-8, "<=");

    const QuasiMomentum km = polar(0.5 * std::sqrt(E), 0.2);
    const auto bd = branch_difference(f, km, E);
    double other = 0.0, zero = 0.0;
    for (std::size_t K = 0; K < bd.size(); ++K) {
      double& slot = model->modes()[K].is_zero() ? zero : other;
      slot = std::max(slot, bd[K]);
    }
    checks.add("branch_difference_confined", "resolvent.open_channel", zero > 0.0 && other <= 1e-12 * zero, other,
               1e-12 * zero, "<=");
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    const auto lc = lap_convergence(f, km, E, eps, 2.0);
    bool decreasing = true;
    for (std::size_t i = 1; i < lc.diff.size(); ++i) decreasing = decreasing && lc.diff[i] < lc.diff[i - 1];
    checks.add("weighted_convergence", "resolvent.limiting_absorption", decreasing && lc.diff.back() < lc.diff.front(),
               lc.diff.back(), lc.diff.front(), "<");
    const auto pr = eps_pairings(f, v, km, E, eps);
    const double cap = f.norm() * v.norm();
    const double pmax = *std::max_element(pr.begin(), pr.end());
    checks.add("eps_pairing_bound", "resolvent.vanishing_pairing", pmax <= cap && pr.back() < pr.front(), pmax, cap,
               "<=");
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 64; ++i) pairs.push_back({U(rng), U(rng)});
    int zm = 0;
    while (!model->modes()[zm].is_zero()) ++zm;
    const auto ho = holder_estimate(f, 2.0, 1.0, zm, pairs);
    checks.add("holder_ratio", "transform.holder", ho.pass(), ho.max_ratio, ho.constant, "<=");

    std::vector<Channels> batch;
    for (int i = 0; i < 2 * cfg.verify.n_random; ++i) {
      Eigen::MatrixXcd w(gr.N1, model->nm());
      for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = cplx(N(rng), N(rng));
      batch.push_back({gr.h(), gr.x(0), model->modes(), w});
    }
    const QuasiMomentum kn{0.45 * lat.b2_len, 0.0};
    double lo_min = 1e300, lo_max = 0.0, up_min = 1e300, up_max = 0.0;
    for (double im : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const auto ne = weighted_norm_equiv(batch, kn, E, cplx(0.0, im), 2.0);
      lo_min = std::min(lo_min, ne.lower_ratio);
      lo_max = std::max(lo_max, ne.lower_ratio);
      up_min = std::min(up_min, ne.upper_ratio);
      up_max = std::max(up_max, ne.upper_ratio);
    }
    const double spread = std::max(lo_max / lo_min, up_max / up_min) - 1.0;
    checks.add("norm_equivalence_spread", "resolvent.weighted_equivalence", spread <= 0.2, spread, 0.2, "<=");
  });

  res.report["checks"] = checks.json();
  res.report["diagnostics"] = checks.diagnostics();
  res.report["failures"] = checks.failures();
  res.report["status"] = checks.all_pass() ? "pass" : suite.regime() ? "regime_violation" : "fail";
  res.exit_code = checks.all_pass() ? kPass : suite.regime() ? kRegimeViolation : kNumericalFailure;
  return res;
}

}  // namespace bsop::cli
