#include "bsop/lap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "bsop/errors.hpp"
#include "bsop/fit.hpp"
#include "bsop/operator.hpp"

namespace bsop {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // (2 pi)^{-1/2}

double wrapped_frequency(int m, int n, double h) {
  const int mm = m <= n / 2 ? m : m - n;
  return mm * 2.0 * std::numbers::pi / (n * h);
}

// Threshold channel test: |a - E| within rounding of the energy scale.
bool at_threshold(double a, double E) { return std::abs(a - E) <= 1e-14 * std::max(1.0, std::abs(E)); }

// Smallest 2^a 3^b 5^c >= n with the requested parity.
std::size_t next_fft_size(std::size_t n, int parity) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    if (static_cast<int>(m % 2) != parity) continue;
    std::size_t r = m;
    for (std::size_t q : {2, 3, 5}) {
      while (r % q == 0) r /= q;
    }
    if (r == 1) return m;
  }
}

double column_norm(const Eigen::VectorXcd& v, double h) { return std::sqrt(h) * v.norm(); }

}  // namespace

LapGrid::LapGrid(LatticeGeometry lat, double L, int N1, int n_ell)
    : lat_(lat), L_(L), n1_(N1), n_ell_(n_ell) {
  if (!(L > 0.0) || N1 < 8 || N1 % 2 != 0) throw Error(ErrorKind::Domain, "x1 grid needs L > 0 and even N1 >= 8");
  if (n_ell < 1 || n_ell % 2 == 0) throw Error(ErrorKind::Domain, "n_ell must be odd");
  for (int j2 = 0; j2 < n_ell; ++j2) {
    for (int j3 = 0; j3 < n_ell; ++j3) {
      nodes_.push_back({((j2 + 0.5) / n_ell - 0.5) * lat.a2_len, ((j3 + 0.5) / n_ell - 0.5) * lat.a3_len});
    }
  }
  const int m = (n_ell - 1) / 2;
  for (int n2 = -m; n2 <= m; ++n2) {
    for (int n3 = -m; n3 <= m; ++n3) modes_.push_back({n2, n3, n2 * lat.b2_len, n3 * lat.b3_len});
  }
}

double Channels::norm() const { return std::sqrt(h) * values.norm(); }

double Channels::weighted_norm(double sigma) const {
  double s = 0.0;
  for (int i = 0; i < n(); ++i) s += std::pow(1.0 + x(i) * x(i), sigma) * values.row(i).squaredNorm();
  return std::sqrt(h * s);
}

double real_space_norm(const Eigen::MatrixXcd& u, const LapGrid& grid) {
  return std::sqrt(grid.h() * grid.transverse_weight()) * u.norm();
}

namespace {

Eigen::MatrixXcd transverse_matrix(const LapGrid& grid, const QuasiMomentum& k) {
  // F[l, K] = ht^2 |S|^{-1/2} exp(-i <k+K, x_l>)
  const auto& nodes = grid.nodes();
  const auto& modes = grid.modes();
  const double c = grid.transverse_weight() / std::sqrt(grid.lattice().cell_area_S);
  Eigen::MatrixXcd F(nodes.size(), modes.size());
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    for (std::size_t K = 0; K < modes.size(); ++K) {
      const double ph = (k.k2 + modes[K].K2) * nodes[l][0] + (k.k3 + modes[K].K3) * nodes[l][1];
      F(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(K)) = c * std::polar(1.0, -ph);
    }
  }
  return F;
}

}  // namespace

Channels transverse_project(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k) {
  if (u.rows() != grid.n1() || u.cols() != static_cast<Eigen::Index>(grid.nodes().size())) {
    throw Error(ErrorKind::Domain, "state does not match the grid");
  }
  return {grid.h(), grid.x(0), grid.modes(), u * transverse_matrix(grid, k)};
}

Eigen::MatrixXcd transverse_synthesize(const Channels& c, const LapGrid& grid, const QuasiMomentum& k) {
  // inverse of the unitary projection: u = C F^* / ht^2
  return c.values * transverse_matrix(grid, k).adjoint() / grid.transverse_weight();
}

double GFTCoefficients::norm() const { return std::sqrt(dxi) * values.norm(); }

GFTCoefficients channel_gft(const Channels& c) {
  const int n = c.n();
  GFTCoefficients g;
  g.dxi = 2.0 * std::numbers::pi / (n * c.h);
  g.x0 = c.x0;
  g.modes = c.modes;
  g.values.resize(n, c.values.cols());
  Eigen::FFT<double> fft;
  std::vector<cplx> in(static_cast<std::size_t>(n)), out;
  for (Eigen::Index K = 0; K < c.values.cols(); ++K) {
    for (int i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = c.values(i, K);
    fft.fwd(out, in);
    for (int m = 0; m < n; ++m) {
      const int idx = ((m - n / 2) % n + n) % n;
      const double xi = (m - n / 2) * g.dxi;
      g.values(m, K) = kInvSqrt2Pi * c.h * std::polar(1.0, -xi * c.x0) * out[static_cast<std::size_t>(idx)];
    }
  }
  return g;
}

Channels channel_igft(const GFTCoefficients& g, double h) {
  const int n = static_cast<int>(g.values.rows());
  Channels c{h, g.x0, g.modes, Eigen::MatrixXcd(n, g.values.cols())};
  Eigen::FFT<double> fft;
  std::vector<cplx> spec(static_cast<std::size_t>(n)), out;
  for (Eigen::Index K = 0; K < g.values.cols(); ++K) {
    for (int m = 0; m < n; ++m) {
      const int idx = ((m - n / 2) % n + n) % n;
      const double xi = (m - n / 2) * g.dxi;
      spec[static_cast<std::size_t>(idx)] = g.values(m, K) * std::polar(1.0, xi * g.x0) / (kInvSqrt2Pi * h);
    }
    fft.inv(out, spec);
    for (int i = 0; i < n; ++i) c.values(i, K) = out[static_cast<std::size_t>(i)];
  }
  return c;
}

GFTCoefficients gft(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k) {
  return channel_gft(transverse_project(u, grid, k));
}

Eigen::MatrixXcd igft(const GFTCoefficients& g, const LapGrid& grid, const QuasiMomentum& k) {
  return transverse_synthesize(channel_igft(g, grid.h()), grid, k);
}

cplx gft_at(const Channels& c, int mode, double xi) {
  cplx s = 0.0;
  for (int i = 0; i < c.n(); ++i) s += c.values(i, mode) * std::polar(1.0, -xi * c.x(i));
  return kInvSqrt2Pi * c.h * s;
}

double parseval_defect(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k) {
  const double a = std::pow(real_space_norm(u, grid), 2);
  const double b = std::pow(gft(u, grid, k).norm(), 2);
  return std::abs(a - b) / a;
}

Channels apply_R0(const Channels& f, const QuasiMomentum& k, const SpectralPoint& z, int pad_nodes) {
  if (pad_nodes < 0) throw Error(ErrorKind::Domain, "negative padding");
  const bool boundary = z.branch != Branch::Complex;
  if (boundary && z.z.imag() != 0.0) throw Error(ErrorKind::Domain, "boundary values need a real energy");
  const int n = f.n();
  const int n_out = n + 2 * pad_nodes;
  Channels u{f.h, f.x0 - pad_nodes * f.h, f.modes, Eigen::MatrixXcd::Zero(n_out, f.values.cols())};
  const double E = z.z.real();
  for (std::size_t K = 0; K < f.modes.size(); ++K) {
    const auto col = static_cast<Eigen::Index>(K);
    const double a = shifted_norm_sq(k, f.modes[K]);
    if (!boundary || (a > E && !at_threshold(a, E))) {
      const cplx p = dispersion_root(a, E, boundary ? 0.0 : z.z.imag()).value();
      u.values.col(col) = resolve_channel(f.values.col(col), f.h, p, pad_nodes, n_out);
      continue;
    }
    if (pad_nodes != 0) throw Error(ErrorKind::Domain, "open channels are evaluated on the input grid only");
    if (at_threshold(a, E)) {
      const cplx mean = f.h * f.values.col(col).sum();
      const double scale = f.h * f.values.col(col).cwiseAbs().sum();
      if (std::abs(mean) > 1e-10 * std::max(scale, 1e-300)) {
        throw Error(ErrorKind::HypothesisViolation,
                    "threshold channel needs a vanishing coefficient at xi = 0");
      }
      // kernel -|x - y| / 2: the regular part of the outgoing kernel as p -> 0
      u.values.col(col) = kink_matrix(cplx(1e-9, 0.0), f.h, n, KinkPart::Full, true) * f.values.col(col);
      continue;
    }
    const double p0 = std::sqrt(E - a);
    const cplx p = z.branch == Branch::Plus ? cplx(p0, 0.0) : cplx(-p0, 0.0);
    u.values.col(col) = kink_matrix(p, f.h, n) * f.values.col(col);
  }
  return u;
}

Channels apply_H0_minus(const Channels& u, const QuasiMomentum& k, cplx z) {
  const int n = u.n();
  Channels out{u.h, u.x0, u.modes, Eigen::MatrixXcd(n, u.values.cols())};
  Eigen::FFT<double> fft;
  std::vector<cplx> buf(static_cast<std::size_t>(n)), spec;
  for (std::size_t K = 0; K < u.modes.size(); ++K) {
    const auto col = static_cast<Eigen::Index>(K);
    const double a = shifted_norm_sq(k, u.modes[K]);
    for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = u.values(i, col);
    fft.fwd(spec, buf);
    for (int m = 0; m < n; ++m) {
      const double xi = wrapped_frequency(m, n, u.h);
      spec[static_cast<std::size_t>(m)] *= xi * xi + a - z;
    }
    fft.inv(buf, spec);
    for (int i = 0; i < n; ++i) out.values(i, col) = buf[static_cast<std::size_t>(i)];
  }
  return out;
}

int decay_padding(const Channels& f, const QuasiMomentum& k, cplx z, double decay_lengths) {
  double p_min = std::numeric_limits<double>::infinity();
  for (const auto& K : f.modes) {
    p_min = std::min(p_min, dispersion_root(shifted_norm_sq(k, K), z.real(), z.imag()).p_I);
  }
  if (!(p_min > 1e-12)) throw Error(ErrorKind::SingularSymbol, "open channel has no decay");
  const double half = std::max(0.5 * f.n() * f.h, decay_lengths / p_min);
  const auto need = static_cast<std::size_t>(std::ceil(2.0 * half / f.h));
  const std::size_t n_out = next_fft_size(std::max(need, static_cast<std::size_t>(f.n())), f.n() % 2);
  if (n_out > (std::size_t(1) << 22)) throw Error(ErrorKind::MemoryGuard, "decay padding too long");
  return static_cast<int>((n_out - static_cast<std::size_t>(f.n())) / 2);
}

double resolvent_identity_defect(const Channels& f, const QuasiMomentum& k, cplx z) {
  const int pad = decay_padding(f, k, z);
  const auto u = apply_R0(f, k, {z, Branch::Complex}, pad);
  auto r = apply_H0_minus(u, k, z);
  r.values.middleRows(pad, f.n()) -= f.values;
  return r.norm() / f.norm();
}

std::vector<double> branch_difference(const Channels& f, const QuasiMomentum& k, double E) {
  const auto up = apply_R0(f, k, {E, Branch::Plus});
  const auto um = apply_R0(f, k, {E, Branch::Minus});
  std::vector<double> out;
  for (Eigen::Index K = 0; K < f.values.cols(); ++K) {
    out.push_back(column_norm(up.values.col(K) - um.values.col(K), f.h));
  }
  return out;
}

LapConvergence lap_convergence(const Channels& f, const QuasiMomentum& k, double E,
                               const std::vector<double>& eps_sequence, double sigma, Branch branch) {
  if (branch == Branch::Complex) throw Error(ErrorKind::Domain, "pick the + i0 or - i0 branch");
  LapConvergence out;
  out.region = classify(k, E);
  out.sigma = sigma;
  if (out.region == Region::BEMinus && !(sigma > 0.5)) {
    throw Error(ErrorKind::Domain, "weighted convergence in B_E^- needs sigma > 1/2");
  }
  if (out.region == Region::Boundary && !(sigma > 1.0)) {
    throw Error(ErrorKind::Domain, "convergence on the energy shell needs sigma > 1");
  }
  const SpectralPoint limit = out.region == Region::BEPlus ? SpectralPoint{E, Branch::Complex}
                                                           : SpectralPoint{E, branch};
  const auto u0 = apply_R0(f, k, limit);
  const double sgn = branch == Branch::Plus ? 1.0 : -1.0;
  for (double e : eps_sequence) {
    auto ue = apply_R0(f, k, {cplx(E, sgn * e), Branch::Complex});
    ue.values -= u0.values;
    out.eps.push_back(e);
    out.diff.push_back(ue.weighted_norm(-sigma));
  }
  if (out.eps.size() >= 2) out.rate = loglog_slope(out.eps, out.diff);
  return out;
}

std::vector<double> eps_pairings(const Channels& f, const Channels& v, const QuasiMomentum& k, double E,
                                 const std::vector<double>& eps_sequence, Branch branch) {
  const double sgn = branch == Branch::Minus ? -1.0 : 1.0;
  std::vector<double> out;
  for (double e : eps_sequence) {
    const auto u = apply_R0(f, k, {cplx(E, sgn * e), Branch::Complex});
    const cplx pair = f.h * (v.values.conjugate().cwiseProduct(u.values)).sum();
    out.push_back(std::abs(e * pair));
  }
  return out;
}

double holder_constant(double sigma, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && alpha < sigma - 0.5)) {
    throw Error(ErrorKind::Domain, "Holder exponent must lie in [0, 1] and below sigma - 1/2");
  }
  const double a = sigma - alpha;
  const double integral = std::sqrt(std::numbers::pi) * std::tgamma(a - 0.5) / std::tgamma(a);
  return std::pow(2.0, 1.0 - alpha) * kInvSqrt2Pi * std::sqrt(integral);
}

HolderReport holder_estimate(const Channels& u, double sigma, double alpha, int mode,
                             const std::vector<std::pair<double, double>>& xi_pairs) {
  HolderReport r;
  r.constant = holder_constant(sigma, alpha);
  if (mode < 0 || mode >= u.values.cols()) throw Error(ErrorKind::Domain, "mode index out of range");
  const double norm = u.weighted_norm(sigma);
  if (!(norm > 0.0)) throw Error(ErrorKind::Domain, "zero state");
  for (const auto& [a, b] : xi_pairs) {
    if (a == b) continue;
    const double d = std::abs(gft_at(u, mode, a) - gft_at(u, mode, b));
    r.max_ratio = std::max(r.max_ratio, d / (std::pow(std::abs(a - b), alpha) * norm));
  }
  return r;
}

double h2_weighted_norm(const Channels& u, const QuasiMomentum& k, double sigma) {
  Channels w = u;
  for (int i = 0; i < u.n(); ++i) w.values.row(i) *= std::pow(1.0 + u.x(i) * u.x(i), 0.5 * sigma);
  // (1 + H0) = (H0 - z) with z = -1
  return apply_H0_minus(w, k, cplx(-1.0, 0.0)).norm();
}

NormEquivalence weighted_norm_equiv(const std::vector<Channels>& batch, const QuasiMomentum& k, double E,
                                    cplx z, double sigma) {
  if (classify(k, E) != Region::BEPlus) throw Error(ErrorKind::Domain, "norm equivalence needs k in B_E^+");
  if (!(std::abs(z.real()) < k.norm_sq()) || !(std::abs(z.imag()) <= 1.0)) {
    throw Error(ErrorKind::Domain, "need |Re z| < |k|^2 and |Im z| <= 1");
  }
  if (batch.empty()) throw Error(ErrorKind::Domain, "empty batch");
  NormEquivalence r{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& f : batch) {
    const double fn = f.weighted_norm(sigma);
    if (!(fn > 0.0)) throw Error(ErrorKind::Domain, "zero state in the batch");
    const int pad = decay_padding(f, k, z);
    const auto u = apply_R0(f, k, {z, Branch::Complex}, pad);
    const double ratio = h2_weighted_norm(u, k, sigma) / fn;
    r.lower_ratio = std::min(r.lower_ratio, ratio);
    r.upper_ratio = std::max(r.upper_ratio, ratio);
  }
  return r;
}

Eigen::MatrixXcd smooth_random_channels(const std::vector<double>& x, int columns, std::mt19937_64& rng,
                                        double center_range) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(x.size()), columns);
  for (int K = 0; K < columns; ++K) {
    for (int b = 0; b < 3; ++b) {
      const double c = center_range * U(rng);
      const double w = 2.0 + U(rng);
      const cplx amp(U(rng), U(rng));
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (x[i] - c) / w;
        v(static_cast<Eigen::Index>(i), K) += amp * std::exp(-0.5 * d * d);
      }
    }
  }
  return v;
}

}  // namespace bsop
