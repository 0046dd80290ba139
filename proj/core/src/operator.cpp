#include "bsop/operator.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "bsop/errors.hpp"
#include "bsop/fit.hpp"

namespace bsop {

namespace {

constexpr cplx I{0.0, 1.0};

void require_same_model(const DiscretizedOp& a, const DiscretizedOp& b) {
  if (a.model != b.model) throw Error(ErrorKind::Domain, "operators built on different models");
}

DiscretizedOp empty_like(std::shared_ptr<const Model> model, OpKind kind, const QuasiMomentum& k,
                         cplx z) {
  DiscretizedOp op;
  op.kind = kind;
  op.k = k;
  op.z = z;
  op.model = std::move(model);
  op.blocks.resize(static_cast<std::size_t>(op.model->nm()));
  return op;
}

}  // namespace

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Gamma: return "Gamma";
    case OpKind::C: return "C";
    case OpKind::C0: return "C0";
    case OpKind::LambdaP: return "LambdaP";
    case OpKind::P: return "P";
    case OpKind::Derivative: return "Derivative";
    case OpKind::Difference: return "Difference";
  }
  return "unknown";
}

Model::Model(const Potential& pot, std::size_t memory_limit_bytes)
    : pot_(pot), memory_limit_(memory_limit_bytes) {
  const auto& lat = pot_.lattice();
  modes_ = enumerate_modes(lat, pot_.grid().M);
  const int n = nm();
  const std::size_t bytes = static_cast<std::size_t>(n) * n1() * n1() * sizeof(cplx);
  if (bytes > memory_limit_) {
    throw Error(ErrorKind::MemoryGuard, "channel blocks need " + std::to_string(bytes >> 20) + " MiB");
  }

  const auto& nodes = pot_.transverse_nodes();
  const auto& bt = pot_.transverse_samples();
  const double c = pot_.transverse_weight() / lat.cell_area_S;
  Q_.resize(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double d2 = modes_[b].K2 - modes_[a].K2;
      const double d3 = modes_[b].K3 - modes_[a].K3;
      cplx s = 0.0;
      for (std::size_t t = 0; t < nodes.size(); ++t) {
        s += bt[t] * bt[t] * std::polar(1.0, d2 * nodes[t][0] + d3 * nodes[t][1]);
      }
      Q_(a, b) = c * s;
    }
  }
  Q_ = 0.5 * (Q_ + Q_.adjoint()).eval();
  const double qmax = Q_.cwiseAbs().maxCoeff();
  real_transverse_ = Q_.imag().cwiseAbs().maxCoeff() <= 1e-14 * qmax;
  if (real_transverse_) Q_ = Q_.real().cast<cplx>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Q_);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  B_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  B_ = 0.5 * (B_ + B_.adjoint()).eval();
  if (real_transverse_) B_ = B_.real().cast<cplx>();
  Q_abs2_ = Q_.cwiseAbs2();

  const auto& w = pot_.longitudinal_samples();
  wl_ = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));

  phi_.resize(dim());
  const double s = std::sqrt(h() * lat.cell_area_S);
  for (int K = 0; K < n; ++K) {
    phi_.segment(K * n1(), n1()) = (s * B_(K, 0)) * wl_.cast<cplx>();
  }
}

Eigen::MatrixXcd Model::weight(const Eigen::MatrixXcd& Y) const {
  return wl_.asDiagonal() * Y * B_.transpose();
}

Eigen::VectorXcd DiscretizedOp::apply(const Eigen::VectorXcd& y) const {
  const int n1 = model->n1();
  const int nm = model->nm();
  Eigen::Map<const Eigen::MatrixXcd> Y(y.data(), n1, nm);
  const Eigen::MatrixXcd S = model->weight(Y);
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(n1, nm);
  for (int K = 0; K < nm; ++K) {
    if (blocks[K].size() != 0) U.col(K).noalias() = blocks[K] * S.col(K);
  }
  const Eigen::MatrixXcd out = model->weight(U);
  return Eigen::Map<const Eigen::VectorXcd>(out.data(), out.size());
}

Eigen::VectorXcd DiscretizedOp::apply_adjoint(const Eigen::VectorXcd& y) const {
  const int n1 = model->n1();
  const int nm = model->nm();
  Eigen::Map<const Eigen::MatrixXcd> Y(y.data(), n1, nm);
  const Eigen::MatrixXcd S = model->weight(Y);
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(n1, nm);
  for (int K = 0; K < nm; ++K) {
    if (blocks[K].size() != 0) U.col(K).noalias() = blocks[K].adjoint() * S.col(K);
  }
  const Eigen::MatrixXcd out = model->weight(U);
  return Eigen::Map<const Eigen::VectorXcd>(out.data(), out.size());
}

Eigen::MatrixXcd DiscretizedOp::to_dense(int max_dim) const {
  const int n1 = model->n1();
  const int nm = model->nm();
  const int N = n1 * nm;
  if (N > max_dim) {
    throw Error(ErrorKind::MemoryGuard, "dense form refused for dimension " + std::to_string(N));
  }
  const auto& B = model->root();
  const auto& D = model->wl();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
  for (int L = 0; L < nm; ++L) {
    if (blocks[L].size() == 0) continue;
    const Eigen::MatrixXcd WT = D.asDiagonal() * blocks[L] * D.asDiagonal();
    for (int K = 0; K < nm; ++K) {
      for (int Kp = 0; Kp < nm; ++Kp) {
        const cplx c = B(K, L) * B(L, Kp);
        if (c == cplx(0.0)) continue;
        A.block(K * n1, Kp * n1, n1, n1) += c * WT;
      }
    }
  }
  return A;
}

double DiscretizedOp::frobenius() const {
  const int n1 = model->n1();
  const int nm = model->nm();
  std::vector<int> idx;
  for (int K = 0; K < nm; ++K) {
    if (blocks[K].size() != 0) idx.push_back(K);
  }
  if (idx.empty()) return 0.0;
  const Eigen::Index n2 = static_cast<Eigen::Index>(n1) * n1;
  const auto& D = model->wl();
  const Eigen::VectorXd d2 = D.cwiseAbs2();
  // ||A||_F^2 = sum_ij d_i^2 d_j^2 sum_{K,K'} T_K(i,j) conj(T_K'(i,j)) |Q(K,K')|^2
  Eigen::MatrixXd wgt = d2 * d2.transpose();
  Eigen::Map<const Eigen::VectorXd> wv(wgt.data(), n2);
  Eigen::MatrixXcd Tall(n2, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    Tall.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXcd>(blocks[idx[c]].data(), n2);
  }
  const Eigen::MatrixXcd WT = wv.asDiagonal() * Tall;
  const Eigen::MatrixXcd G = Tall.adjoint() * WT;  // G(a, b) = sum conj(T_a) w T_b
  const auto& Q2 = model->gram_abs_sq();
  double s = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      s += (G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * Q2(idx[b], idx[a])).real();
    }
  }
  return std::sqrt(std::max(s, 0.0));
}

DiscretizedOp DiscretizedOp::adjoint() const {
  DiscretizedOp out = *this;
  out.z = std::conj(z);
  for (auto& b : out.blocks) {
    if (b.size() != 0) b = b.adjoint().eval();
  }
  return out;
}

DiscretizedOp operator-(const DiscretizedOp& a, const DiscretizedOp& b) {
  require_same_model(a, b);
  DiscretizedOp out = a;
  out.kind = OpKind::Difference;
  out.hermitian = a.hermitian && b.hermitian;
  for (std::size_t K = 0; K < out.blocks.size(); ++K) {
    if (b.blocks[K].size() == 0) continue;
    if (out.blocks[K].size() == 0) {
      out.blocks[K] = -b.blocks[K];
    } else {
      out.blocks[K] -= b.blocks[K];
    }
  }
  return out;
}

DiscretizedOp operator+(const DiscretizedOp& a, const DiscretizedOp& b) {
  require_same_model(a, b);
  DiscretizedOp out = a;
  out.kind = OpKind::Difference;
  out.hermitian = a.hermitian && b.hermitian;
  for (std::size_t K = 0; K < out.blocks.size(); ++K) {
    if (b.blocks[K].size() == 0) continue;
    if (out.blocks[K].size() == 0) {
      out.blocks[K] = b.blocks[K];
    } else {
      out.blocks[K] += b.blocks[K];
    }
  }
  return out;
}

DiscretizedOp operator*(cplx s, const DiscretizedOp& a) {
  DiscretizedOp out = a;
  out.hermitian = a.hermitian && s.imag() == 0.0;
  for (auto& b : out.blocks) {
    if (b.size() != 0) b *= s;
  }
  return out;
}

std::vector<cplx> channel_roots(const Model& model, const QuasiMomentum& k, double E, double eps) {
  std::vector<cplx> p;
  p.reserve(model.modes().size());
  for (const auto& K : model.modes()) p.push_back(dispersion_root(shifted_norm_sq(k, K), E, eps).value());
  return p;
}

cplx gamma_kernel(const Potential& pot, const std::array<double, 3>& x,
                  const std::array<double, 3>& y, const QuasiMomentum& k, double E, double eps,
                  int M) {
  const auto& lat = pot.lattice();
  const double ww = pot(x[0], x[1], x[2]) * pot(y[0], y[1], y[2]);
  const double r = std::abs(x[0] - y[0]);
  cplx s = 0.0;
  for (const auto& K : enumerate_modes(lat, M)) {
    const cplx p = dispersion_root(shifted_norm_sq(k, K), E, eps).value();
    const double ph = (k.k2 + K.K2) * (x[1] - y[1]) + (k.k3 + K.K3) * (x[2] - y[2]);
    s += std::exp(I * p * r) / p * std::polar(1.0, ph);
  }
  return I * lat.green_coeff * ww * s;
}

DiscretizedOp assemble_gamma(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                             double eps) {
  const auto roots = channel_roots(*model, k, E, eps);
  DiscretizedOp op = empty_like(model, OpKind::Gamma, k, {E, eps});
  bool evanescent = true;
  for (int K = 0; K < model->nm(); ++K) {
    op.blocks[K] = kink_matrix(roots[K], model->h(), model->n1());
    if (roots[K].real() != 0.0) evanescent = false;
  }
  op.hermitian = eps == 0.0 && evanescent;
  return op;
}

cplx lambda_coefficient(const LatticeGeometry& lat, const QuasiMomentum& k, double E, double eps) {
  const cplx p = dispersion_root(k.norm_sq(), E, eps).value();
  return I * lat.green_coeff / p;
}

Decomposition assemble_decomposition(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                     double E, double eps) {
  const cplx p0 = dispersion_root(k.norm_sq(), E, eps).value();
  Decomposition d;
  d.Lambda = lambda_coefficient(model->lattice(), k, E, eps);
  const int n1 = model->n1();
  d.P = empty_like(model, OpKind::P, k, {E, eps});
  d.P.blocks[0] = Eigen::MatrixXcd::Constant(n1, n1, model->h() * model->lattice().cell_area_S);
  d.P.hermitian = true;
  d.C = assemble_gamma(model, k, E, eps);
  d.C.kind = OpKind::C;
  d.C.blocks[0] = kink_matrix(p0, model->h(), n1, KinkPart::Full, true);
  return d;
}

DiscretizedOp assemble_C0(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E) {
  if (classify(k, E) != Region::BEMinus) {
    throw Error(ErrorKind::Domain, "oscillatory part requires |k|^2 < E");
  }
  const cplx p0 = dispersion_root(k.norm_sq(), E, 0.0).value();
  DiscretizedOp op = empty_like(model, OpKind::C0, k, {E, 0.0});
  op.blocks[0] = kink_matrix(p0, model->h(), model->n1());
  return op;
}

DiscretizedOp assemble_gamma_dk(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                double E, int j) {
  if (j != 0 && j != 1) throw Error(ErrorKind::Domain, "derivative direction must be 0 or 1");
  const auto roots = channel_roots(*model, k, E, 0.0);
  DiscretizedOp op = empty_like(model, OpKind::Derivative, k, {E, 0.0});
  bool evanescent = true;
  for (int K = 0; K < model->nm(); ++K) {
    const auto& mode = model->modes()[K];
    const double q = j == 0 ? k.k2 + mode.K2 : k.k3 + mode.K3;
    const cplx dp = -q / roots[K];
    op.blocks[K] = kink_matrix(roots[K], model->h(), model->n1(), KinkPart::Derivative) * dp;
    if (roots[K].real() != 0.0) evanescent = false;
  }
  op.hermitian = evanescent;
  return op;
}

Eigen::VectorXcd resolve_channel(const Eigen::VectorXcd& f, double h, cplx p, int offset, int n_out) {
  const double pI = p.imag();
  if (!(pI > 1e-12)) throw Error(ErrorKind::SingularSymbol, "channel root has no imaginary part");
  // image contributions of the periodized kernel fall below exp(-32.3) ~ 1e-14
  const double span = std::max<double>(offset + f.size(), n_out) * h;
  const double total = span + std::max(32.3 / pI, span);
  std::size_t n = 1;
  while (n * h < total) n <<= 1;
  if (n > (std::size_t(1) << 24)) {
    throw Error(ErrorKind::MemoryGuard, "padded channel transform too long");
  }
  std::vector<cplx> buf(n, cplx(0.0)), spec;
  for (Eigen::Index i = 0; i < f.size(); ++i) buf[static_cast<std::size_t>(offset + i)] = f[i];
  Eigen::FFT<double> fft;
  fft.fwd(spec, buf);
  const double dxi = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
  const cplx p2 = p * p;
  for (std::size_t m = 0; m < n; ++m) {
    const double mm = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    const double xi = mm * dxi;
    const cplx sym = xi * xi - p2;
    if (std::abs(sym) < 1e-12) throw Error(ErrorKind::SingularSymbol, "symbol vanishes on the grid");
    spec[m] /= sym;
  }
  fft.inv(buf, spec);
  Eigen::VectorXcd out(n_out);
  for (int i = 0; i < n_out; ++i) out[i] = buf[static_cast<std::size_t>(i)];
  return out;
}

Eigen::VectorXcd apply_gamma_spectral(const Model& model, const Eigen::VectorXcd& y,
                                      const QuasiMomentum& k, cplx z) {
  const int n1 = model.n1();
  const int nm = model.nm();
  const double h = model.h();
  const double sh = std::sqrt(h);
  Eigen::Map<const Eigen::MatrixXcd> Y(y.data(), n1, nm);
  const Eigen::MatrixXcd S = model.weight(Y);
  Eigen::MatrixXcd U(n1, nm);
  for (int K = 0; K < nm; ++K) {
    const cplx p = dispersion_root(shifted_norm_sq(k, model.modes()[K]), z.real(), z.imag()).value();
    const Eigen::VectorXcd f = S.col(K) / sh;
    U.col(K) = sh * resolve_channel(f, h, p, 0, n1);
  }
  const Eigen::MatrixXcd out = model.weight(U);
  return Eigen::Map<const Eigen::VectorXcd>(out.data(), out.size());
}

double hs_norm(const DiscretizedOp& op) { return op.frobenius(); }

double bound_c(const Potential& pot, double delta) {
  const auto& lat = pot.lattice();
  const double kappa = lat.green_coeff;
  const double kink_part = 2.0 * kappa * pot.weighted_norm_h1();
  const double alpha3 = summability_constant(lat, 3.0, delta);
  const double channel_part =
      kappa * lat.cell_area_S * pot.norm_l2_linf() * pot.norm_linf() * std::sqrt(alpha3);
  return kink_part + channel_part;
}

LimitRates limit_rates(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                       const std::vector<double>& eps_sequence) {
  if (eps_sequence.empty()) throw Error(ErrorKind::Domain, "empty eps sequence");
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    if (!(eps_sequence[i] > 0.0) || (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))) {
      throw Error(ErrorKind::Domain, "eps sequence must be positive and decreasing");
    }
  }
  LimitRates out;
  out.region = classify(k, E);
  if (out.region == Region::Boundary) throw Error(ErrorKind::Domain, "k on the energy shell");
  out.eps = eps_sequence;

  const auto g0 = assemble_gamma(model, k, E, 0.0);
  out.gamma_norm = g0.frobenius();
  const bool minus_region = out.region == Region::BEMinus;
  DiscretizedOp c_ref, target, g0_adj;
  if (minus_region) {
    c_ref = assemble_decomposition(model, k, E, 0.0).C;
    target = g0 - cplx(2.0) * assemble_C0(model, k, E);
    g0_adj = g0.adjoint();
  }
  for (double e : eps_sequence) {
    const auto gp = assemble_gamma(model, k, E, e);
    const auto gm = assemble_gamma(model, k, E, -e);
    out.plus.push_back((gp - g0).frobenius());
    out.minus.push_back((gm - g0).frobenius());
    if (minus_region) {
      const auto cp = assemble_decomposition(model, k, E, e).C;
      const auto cm = assemble_decomposition(model, k, E, -e).C;
      out.c_plus.push_back((cp - c_ref).frobenius());
      out.c_minus.push_back((cm - c_ref).frobenius());
      out.limit_defect.push_back((gm - target).frobenius());
      out.adjoint_defect.push_back((gm - g0_adj).frobenius());
    }
  }
  if (eps_sequence.size() >= 2) {
    out.slope_plus = loglog_slope(out.eps, out.plus);
    out.slope_minus = loglog_slope(out.eps, out.minus);
    if (minus_region) {
      out.slope_c_plus = loglog_slope(out.eps, out.c_plus);
      out.slope_c_minus = loglog_slope(out.eps, out.c_minus);
    }
  }
  return out;
}

}  // namespace bsop
