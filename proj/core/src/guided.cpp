#include "bsop/guided.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsop/errors.hpp"
#include "bsop/fit.hpp"

namespace bsop {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

Channels as_channels(const Model& model, const Eigen::MatrixXcd& values) {
  return {model.h(), model.grid().x(0), model.modes(), values};
}

// Function samples of W y for a state y (states carry the sqrt(h) quadrature factor).
Eigen::MatrixXcd weighted_samples(const Model& model, const Eigen::VectorXcd& y) {
  Eigen::Map<const Eigen::MatrixXcd> Y(y.data(), model.n1(), model.nm());
  return model.weight(Y) / std::sqrt(model.h());
}

int zero_mode_index(const std::vector<DualMode>& modes) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].is_zero()) return static_cast<int>(i);
  }
  throw Error(ErrorKind::Domain, "mode set lacks K = 0");
}

}  // namespace

NullVector null_vector(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E, double g,
                       const EigOptions& opts) {
  if (!(g > 0.0)) throw Error(ErrorKind::Domain, "coupling g must be positive");
  const auto G = assemble_gamma(model, k, E, 0.0);
  EigOptions o = opts;
  o.second = true;
  const auto ep = leading_eig(G, o);
  const double target = 1.0 / g;
  NullVector nv;
  nv.eigenvalue = ep.lambda1;
  nv.distance = std::abs(ep.lambda1 - target);
  nv.near_multiplicity = (nv.distance <= kNullDistance) + (std::abs(ep.lambda2 - target) <= kNullDistance);
  if (std::abs(ep.lambda2 - target) < nv.distance) {
    std::ostringstream msg;
    msg << "eigenvalue nearest 1/g is not the leading one; |lambda2 - 1/g| = " << std::abs(ep.lambda2 - target);
    throw Error(ErrorKind::NotOnCurve, msg.str());
  }
  if (nv.distance > kNullDistance) {
    std::ostringstream msg;
    msg << "nearest eigenvalue " << ep.lambda1.real() << " lies " << nv.distance << " from 1/g";
    throw Error(ErrorKind::NotOnCurve, msg.str());
  }
  nv.v = ep.psi1;
  nv.residual = (nv.v - g * G.apply(nv.v)).norm() / nv.v.norm();
  return nv;
}

GuidedState build_guided_state(const NullVector& nv, const Model& model, const QuasiMomentum& k, double E,
                               double g, const GuidedOptions& opts) {
  if (classify(k, E) != Region::BEPlus) throw Error(ErrorKind::Domain, "guided state needs |k|^2 > E");
  GuidedState st;
  st.k = k;
  st.E = E;
  st.g = g;
  st.box_half_length = model.grid().L;
  const Channels f = as_channels(model, weighted_samples(model, nv.v));
  const int pad = decay_padding(f, k, cplx(E, 0.0), opts.decay_lengths);
  st.u = apply_R0(f, k, {cplx(E, 0.0), Branch::Complex}, pad);
  st.u.values *= g;

  // (H0 - E) u - g W^2 u, with W supported on the box rows
  Channels r = apply_H0_minus(st.u, k, cplx(E, 0.0));
  const Eigen::MatrixXcd u_box = st.u.values.middleRows(pad, model.n1());
  const Eigen::MatrixXcd wu = model.weight(u_box);
  r.values.middleRows(pad, model.n1()) -= g * model.weight(wu);
  st.eigen_residual = r.norm() / st.u.norm();

  const Eigen::MatrixXcd v_samples = Eigen::Map<const Eigen::MatrixXcd>(nv.v.data(), model.n1(), model.nm()) /
                                     std::sqrt(model.h());
  st.consistency = (wu - v_samples).norm() / v_samples.norm();
  return st;
}

DecayReport decay_report(const GuidedState& state, int m_max) {
  if (m_max < 0) throw Error(ErrorKind::Domain, "m_max must be nonnegative");
  DecayReport d;
  for (int m = 0; m <= m_max; ++m) d.moments.push_back(state.u.weighted_norm(m));

  const int n = state.u.n();
  const double x_end = state.u.x(n - 1);
  std::vector<double> xs, ls;
  for (int i = 0; i < n; ++i) {
    const double x = state.u.x(i);
    if (x < 0.5 * x_end) continue;
    const double s = state.u.values.row(i).squaredNorm();
    if (!(s > 0.0)) continue;
    xs.push_back(x);
    ls.push_back(std::log(s));
  }
  if (xs.size() < 2) throw Error(ErrorKind::Estimation, "decay window holds fewer than two samples");
  d.decay_rate = -fit_line(xs, ls).slope;
  d.predicted_rate = 2.0 * dispersion_root(state.k.norm_sq(), state.E, 0.0).p_I;
  d.asymptotic = 0.5 * x_end > state.box_half_length;
  return d;
}

FourierVanishing fourier_vanishing(const Channels& f, int zero_mode) {
  if (zero_mode < 0 || zero_mode >= f.values.cols()) throw Error(ErrorKind::Domain, "mode index out of range");
  cplx c0 = 0.0, c1 = 0.0;
  for (int i = 0; i < f.n(); ++i) {
    c0 += f.values(i, zero_mode);
    c1 += f.x(i) * f.values(i, zero_mode);
  }
  const double norm = std::sqrt(f.h) * f.values.col(zero_mode).norm();
  if (!(norm > 0.0)) return {};
  // coefficient (2 pi)^{-1/2} int f e^{-i xi x} and its xi-derivative at 0
  return {kInvSqrt2Pi * f.h * std::abs(c0) / norm, kInvSqrt2Pi * f.h * std::abs(c1) / norm};
}

bool BoundaryCheck::pass() const {
  if (!conclusive || !(extrapolated > 0.0)) return false;
  return std::all_of(sigma_min.begin(), sigma_min.end(), [](double s) { return s > 0.0; });
}

BoundaryCheck boundary_case_check(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                                  double g, const std::vector<double>& eps_sequence,
                                  const std::vector<double>& tail, const EigOptions& opts) {
  if (std::abs(k.norm_sq() - E) > 1e-12 * std::max(1.0, E)) {
    throw Error(ErrorKind::Domain, "boundary check needs |k|^2 = E");
  }
  if (eps_sequence.empty() || tail.size() < 2) throw Error(ErrorKind::Domain, "need eps values and a tail of two");
  BoundaryCheck bc;
  const auto flags = halfspace_flags(model->potential().spec());
  bc.hypotheses = flags.c4_smooth_transverse && flags.vanishes_on_halfspace;
  SingularPair last;
  double eps_min = std::numeric_limits<double>::infinity();
  auto sweep = [&](const std::vector<double>& eps, std::vector<double>& out_eps, std::vector<double>& out_sigma) {
    for (double e : eps) {
      if (!(e > 0.0)) throw Error(ErrorKind::Domain, "eps must be positive");
      auto sp = min_singular_pair(assemble_gamma(model, k, E, e), g, opts);
      out_eps.push_back(e);
      out_sigma.push_back(sp.value);
      if (e < eps_min) {
        eps_min = e;
        last = std::move(sp);
      }
    }
  };
  sweep(eps_sequence, bc.eps, bc.sigma_min);
  sweep(tail, bc.tail_eps, bc.tail_sigma);

  std::vector<double> roots;
  for (double e : bc.tail_eps) roots.push_back(std::sqrt(e));
  const auto fit = fit_line(roots, bc.tail_sigma);
  bc.extrapolated = fit.intercept;
  bc.slope = fit.slope;
  double smax = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    bc.fit_residual = std::max(bc.fit_residual, std::abs(bc.tail_sigma[i] - (fit.intercept + fit.slope * roots[i])));
    smax = std::max(smax, bc.tail_sigma[i]);
  }
  bc.conclusive = std::isfinite(bc.extrapolated) && bc.fit_residual <= 0.01 * smax;
  const Channels wv = as_channels(*model, weighted_samples(*model, last.right));
  bc.candidate = fourier_vanishing(wv, zero_mode_index(model->modes()));
  return bc;
}

}  // namespace bsop
