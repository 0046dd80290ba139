#include "bsop/fermi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bsop/errors.hpp"
#include "bsop/fit.hpp"
#include "bsop/parallel.hpp"

namespace bsop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

QuasiMomentum on_ray(double theta, double radius) {
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

double dist(const QuasiMomentum& a, const QuasiMomentum& b) { return std::hypot(a.k2 - b.k2, a.k3 - b.k3); }

double cross(const QuasiMomentum& a, const QuasiMomentum& b, const QuasiMomentum& c) {
  return (b.k2 - a.k2) * (c.k3 - a.k3) - (b.k3 - a.k3) * (c.k2 - a.k2);
}

bool segments_intersect(const QuasiMomentum& p1, const QuasiMomentum& p2, const QuasiMomentum& q1,
                        const QuasiMomentum& q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

void finish_curve(FermiCurve& c) {
  std::vector<QuasiMomentum> poly;
  poly.reserve(c.nodes.size());
  for (const auto& n : c.nodes) poly.push_back(n.k);
  c.winding_number = winding_number(poly);
  c.simple = polyline_simple(poly);
}

}  // namespace

bool Annulus::contains(const QuasiMomentum& k) const {
  const double r = k.norm();
  return r > inner_radius && r < outer_radius;
}

bool Annulus::contains_closed(const QuasiMomentum& k, double slack) const {
  const double r = k.norm();
  return r >= inner_radius * (1.0 - slack) && r <= outer_radius * (1.0 + slack);
}

double separation_threshold() { return 3.0 + std::sqrt(5.0); }

Annulus make_annulus(const LatticeGeometry& lat, double E, double g, double s, double c_bound,
                     double delta) {
  if (!(s > separation_threshold())) {
    throw Error(ErrorKind::Domain, "s must exceed 3 + sqrt(5) = " + std::to_string(separation_threshold()));
  }
  const double e_delta = energy_threshold(lat, delta);
  if (!(E > 0.0 && E < e_delta)) {
    throw Error(ErrorKind::Domain, "E must lie in (0, E_delta) with E_delta = " + std::to_string(e_delta));
  }
  if (!(g > 0.0)) throw Error(ErrorKind::Domain, "coupling g must be positive");
  if (!(c_bound > 0.0) || !(g < 1.0 / (s * c_bound))) {
    throw Error(ErrorKind::RegimeViolation,
                "coupling g must stay below 1/(s c) = " + std::to_string(1.0 / (s * c_bound)));
  }
  Annulus a;
  a.E = E;
  a.g = g;
  a.s = s;
  a.q_minus = (s - 1.0) / s * lat.green_coeff;
  a.q_plus = (s - 1.0) / (s - 2.0) * lat.green_coeff;
  a.inner_radius = std::sqrt(E + a.q_minus * a.q_minus * g * g);
  a.outer_radius = std::sqrt(E + a.q_plus * a.q_plus * g * g);
  return a;
}

const char* to_string(TraceMode mode) {
  return mode == TraceMode::RadialScan ? "radial_scan" : "continuation";
}

LevelValue level_value(const FermiContext& ctx, const QuasiMomentum& k, const Eigen::VectorXcd& start) {
  if (classify(k, ctx.E) != Region::BEPlus) throw Error(ErrorKind::Domain, "level value needs |k|^2 > E");
  EigOptions o = ctx.eig;
  o.second = false;
  o.krylov.start = start;
  const auto ep = leading_eig(assemble_gamma(ctx.model, k, ctx.E, 0.0), o);
  return {ctx.g * ep.lambda1.real() - 1.0, ep.lambda1.real(), ep.psi1};
}

double measured_c(std::shared_ptr<const Model> model, double E, double p_max, int n_angles, int n_radii) {
  double c = 0.0;
  for (int j = 1; j <= n_radii; ++j) {
    const double p = p_max * j / n_radii;
    for (int a = 0; a < n_angles; ++a) {
      const auto k = on_ray(kTwoPi * a / n_angles, std::sqrt(E + p * p));
      c = std::max(c, assemble_decomposition(model, k, E, 0.0).C.frobenius());
    }
  }
  return c;
}

RadialRoot radial_root(double theta, const Annulus& ann, const FermiContext& ctx) {
  RadialRoot out;
  out.theta = theta;
  // work in u = 1/p_I, where g lambda1 - 1 is nearly linear
  auto radius_of = [&](double u) { return std::sqrt(ctx.E + 1.0 / (u * u)); };
  Eigen::VectorXcd warm;
  auto f = [&](double u) {
    const auto lv = level_value(ctx, on_ray(theta, radius_of(u)), warm);
    warm = lv.psi1;
    ++out.evaluations;
    return lv;
  };
  double ua = 1.0 / (ann.q_minus * ann.g), ub = 1.0 / (ann.q_plus * ann.g);
  auto la = f(ua);
  auto lb = f(ub);
  out.value_inner = la.value;
  out.value_outer = lb.value;
  if (!(la.value > 0.0 && lb.value < 0.0)) {
    std::ostringstream msg;
    msg << "no sign change of g lambda1 - 1 on ray theta=" << theta << ": inner " << la.value
        << ", outer " << lb.value;
    throw Error(ErrorKind::RegimeViolation, msg.str());
  }
  double fa = la.value, fb = lb.value;
  LevelValue best = std::abs(fa) < std::abs(fb) ? la : lb;
  double ubest = std::abs(fa) < std::abs(fb) ? ua : ub;
  int side = 0;
  for (int it = 0; it < 100 && std::abs(best.value) > kRootTolerance; ++it) {
    double u = (ua * fb - ub * fa) / (fb - fa);
    if (!(u > std::min(ua, ub) && u < std::max(ua, ub))) u = 0.5 * (ua + ub);
    const auto lc = f(u);
    if (std::abs(lc.value) < std::abs(best.value)) {
      best = lc;
      ubest = u;
    }
    if ((lc.value > 0.0) == (fa > 0.0)) {
      ua = u;
      fa = lc.value;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      ub = u;
      fb = lc.value;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (std::abs(ua - ub) <= 1e-15 * std::abs(ua)) break;
  }
  out.radius = radius_of(ubest);
  out.k = on_ray(theta, out.radius);
  out.lambda1 = best.lambda1;
  out.residual = std::abs(best.value);
  if (out.residual > kRootTolerance) {
    throw Error(ErrorKind::Numerical, "radial root stalled at residual " + std::to_string(out.residual));
  }
  return out;
}

int winding_number(const std::vector<QuasiMomentum>& poly) {
  double total = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    double d = std::atan2(b.k3, b.k2) - std::atan2(a.k3, a.k2);
    if (d > std::numbers::pi) d -= kTwoPi;
    if (d <= -std::numbers::pi) d += kTwoPi;
    total += d;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

bool polyline_simple(const std::vector<QuasiMomentum>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(poly[i], poly[i + 1], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

namespace {

FermiCurve radial_scan(const Annulus& ann, int n_theta, const FermiContext& ctx) {
  if (n_theta < 3) throw Error(ErrorKind::Domain, "radial scan needs at least 3 rays");
  auto solve = [&](const std::vector<double>& thetas) {
    std::vector<RadialRoot> roots(thetas.size());
    parallel_for(static_cast<int>(thetas.size()), ctx.threads,
                 [&](int i) { roots[i] = radial_root(thetas[i], ann, ctx); });
    return roots;
  };
  std::vector<double> thetas;
  for (int i = 0; i < n_theta; ++i) thetas.push_back(kTwoPi * i / n_theta);
  auto roots = solve(thetas);

  // one refinement pass where the radius jumps by more than 3x the median
  std::vector<double> jumps;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    jumps.push_back(std::abs(roots[(i + 1) % roots.size()].radius - roots[i].radius));
  }
  std::vector<double> sorted = jumps;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<double> extra;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (jumps[i] > 3.0 * median && jumps[i] > 1e-12 * roots[i].radius) {
      extra.push_back(thetas[i] + 0.5 * kTwoPi / n_theta);
    }
  }
  if (!extra.empty()) {
    auto more = solve(extra);
    roots.insert(roots.end(), more.begin(), more.end());
    std::sort(roots.begin(), roots.end(), [](const RadialRoot& a, const RadialRoot& b) { return a.theta < b.theta; });
  }

  FermiCurve c;
  c.mode = TraceMode::RadialScan;
  for (const auto& r : roots) c.nodes.push_back({r.theta, r.k, r.radius, r.lambda1, r.residual, -1.0});
  for (std::size_t i = 0; i + 1 < c.nodes.size(); ++i) {
    c.step = std::max(c.step, dist(c.nodes[i].k, c.nodes[i + 1].k));
  }
  c.closure_gap = dist(c.nodes.back().k, c.nodes.front().k);
  c.step = std::max(c.step, c.closure_gap);
  finish_curve(c);
  return c;
}

FermiCurve continuation(const Annulus& ann, int n_theta, const FermiContext& ctx) {
  if (n_theta < 3) throw Error(ErrorKind::Domain, "continuation needs at least 3 steps per turn");
  const auto seed = radial_root(0.0, ann, ctx);
  const double h = kTwoPi * seed.radius / n_theta;

  struct State {
    QuasiMomentum k;
    double lambda1;
    double residual;
    std::array<double, 2> grad;  // of g lambda1
    Eigen::VectorXcd psi;
  };
  auto gradient_at = [&](const QuasiMomentum& k, double lambda1, double residual) {
    const auto fh = fh_gradient(ctx.model, k, ctx.E, ctx.eig);
    return State{k, lambda1, residual, {ctx.g * fh.grad[0], ctx.g * fh.grad[1]}, fh.psi1};
  };
  // corrector along the normal through the predictor, chord slope from the last node
  auto step_from = [&](const State& s, double hs, State& out) {
    const double gn = std::hypot(s.grad[0], s.grad[1]);
    if (!(gn > 0.0)) return false;
    QuasiMomentum t{s.grad[1] / gn, -s.grad[0] / gn};
    if (s.k.k2 * t.k3 - s.k.k3 * t.k2 < 0.0) t = {-t.k2, -t.k3};
    const QuasiMomentum n{s.grad[0] / gn, s.grad[1] / gn};
    const QuasiMomentum kp{s.k.k2 + hs * t.k2, s.k.k3 + hs * t.k3};
    double a = 0.0;
    Eigen::VectorXcd warm = s.psi;
    for (int it = 0; it < 12; ++it) {
      const QuasiMomentum k{kp.k2 + a * n.k2, kp.k3 + a * n.k3};
      if (classify(k, ctx.E) != Region::BEPlus) return false;
      const auto lv = level_value(ctx, k, warm);
      warm = lv.psi1;
      if (std::abs(lv.value) <= kRootTolerance) {
        out = gradient_at(k, lv.lambda1, std::abs(lv.value));
        return true;
      }
      a -= lv.value / gn;
    }
    return false;
  };

  FermiCurve c;
  c.mode = TraceMode::Continuation;
  c.step = h;
  State cur = gradient_at(seed.k, seed.lambda1, seed.residual);
  auto push = [&](const State& s) {
    c.nodes.push_back({wrap_angle(std::atan2(s.k.k3, s.k.k2)), s.k, s.k.norm(), s.lambda1, s.residual,
                       std::hypot(s.grad[0], s.grad[1]) / ctx.g});
  };
  push(cur);
  double turned = 0.0;
  const int max_steps = 4 * n_theta + 16;
  for (int stepno = 0; stepno < max_steps; ++stepno) {
    const double to_seed = dist(cur.k, seed.k);
    const bool last = turned > std::numbers::pi && to_seed <= 1.5 * h;
    double hs = last ? to_seed : h;
    State next;
    int halvings = 0;
    while (!step_from(cur, hs, next)) {
      if (++halvings > 5) {
        std::ostringstream msg;
        msg << "continuation failed after 5 step halvings at k=(" << cur.k.k2 << ", " << cur.k.k3
            << "), " << c.nodes.size() << " nodes traced";
        throw Error(ErrorKind::Tracing, msg.str());
      }
      hs *= 0.5;
    }
    double d = std::atan2(next.k.k3, next.k.k2) - std::atan2(cur.k.k3, cur.k.k2);
    if (d > std::numbers::pi) d -= kTwoPi;
    if (d <= -std::numbers::pi) d += kTwoPi;
    turned += d;
    if (last && halvings == 0) {
      c.closure_gap = dist(next.k, seed.k);
      finish_curve(c);
      if (c.closure_gap > 0.5 * h) {
        throw Error(ErrorKind::Tracing, "continuation did not return to the seed; gap " +
                                            std::to_string(c.closure_gap));
      }
      c.closure_gap = dist(c.nodes.back().k, c.nodes.front().k);
      return c;
    }
    cur = std::move(next);
    push(cur);
  }
  throw Error(ErrorKind::Tracing, "continuation exceeded its step budget");
}

}  // namespace

FermiCurve trace_curve(const Annulus& ann, int n_theta, TraceMode mode, const FermiContext& ctx) {
  return mode == TraceMode::RadialScan ? radial_scan(ann, n_theta, ctx) : continuation(ann, n_theta, ctx);
}

CurveReport curve_report(const FermiCurve& curve, const Annulus& ann, const FermiContext& ctx,
                         bool gradients) {
  CurveReport r;
  const std::size_t n = curve.nodes.size();
  if (n == 0) throw Error(ErrorKind::Domain, "empty curve");
  r.min_radius = r.max_radius = curve.nodes[0].radius;
  r.within_annulus = true;
  for (const auto& nd : curve.nodes) {
    r.min_radius = std::min(r.min_radius, nd.radius);
    r.max_radius = std::max(r.max_radius, nd.radius);
    r.max_residual = std::max(r.max_residual, nd.residual);
    r.within_annulus = r.within_annulus && ann.contains(nd.k);
  }
  // radius as a function of theta, second divided differences on the cyclic node order
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return curve.nodes[a].theta < curve.nodes[b].theta; });
  if (n >= 3) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = curve.nodes[order[(i + n - 1) % n]];
      const auto& b = curve.nodes[order[i]];
      const auto& c = curve.nodes[order[(i + 1) % n]];
      const double ta = wrap_angle(a.theta - b.theta + std::numbers::pi) - std::numbers::pi;
      const double tc = wrap_angle(c.theta - b.theta + std::numbers::pi) - std::numbers::pi;
      if (!(tc > 0.0 && ta < 0.0)) continue;
      const double d2 = 2.0 * ((c.radius - b.radius) / tc - (b.radius - a.radius) / (-ta)) / (tc - ta);
      r.smoothness = std::max(r.smoothness, std::abs(d2));
    }
  }
  if (gradients) {
    std::vector<double> gnorm(n);
    parallel_for(static_cast<int>(n), ctx.threads, [&](int i) {
      const auto& nd = curve.nodes[i];
      gnorm[i] = nd.gradient >= 0.0 ? nd.gradient : fh_gradient(ctx.model, nd.k, ctx.E, ctx.eig).norm();
    });
    r.min_gradient = *std::min_element(gnorm.begin(), gnorm.end());
    r.gradients = true;
  }
  return r;
}

GScaling g_scaling(const FermiContext& ctx, double s, double c_bound, double delta,
                   const std::vector<double>& couplings, double theta) {
  GScaling out;
  const auto& lat = ctx.model->lattice();
  for (double g : couplings) {
    FermiContext c = ctx;
    c.g = g;
    const auto ann = make_annulus(lat, ctx.E, g, s, c_bound, delta);
    const auto root = radial_root(theta, ann, c);
    out.g.push_back(g);
    out.offset.push_back(root.radius - std::sqrt(ctx.E));
  }
  out.exponent = loglog_slope(out.g, out.offset);
  return out;
}

}  // namespace bsop
