#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "bsop/geometry.hpp"
#include "bsop/kink_quadrature.hpp"
#include "bsop/potential.hpp"

namespace bsop {

// Discretization shared by every operator at a given grid and potential.
// States are N1 x nm matrices stored column-major (index K * N1 + i): nodal in
// x1, modal in the transverse direction. The transverse factor of W acts on
// modes through B = Q^{1/2}, Q[K, K'] = int_S b^2 exp(i<K'-K, x>) / |S| by the
// node rule; Q does not depend on the quasi-momentum.
class Model {
 public:
  Model(const Potential& pot, std::size_t memory_limit_bytes = std::size_t(2) << 30);

  const Potential& potential() const { return pot_; }
  const LatticeGeometry& lattice() const { return pot_.lattice(); }
  const Grid& grid() const { return pot_.grid(); }
  const std::vector<DualMode>& modes() const { return modes_; }
  int n1() const { return grid().N1; }
  int nm() const { return static_cast<int>(modes_.size()); }
  int dim() const { return n1() * nm(); }
  double h() const { return grid().h(); }

  const Eigen::MatrixXcd& gram() const { return Q_; }
  const Eigen::MatrixXcd& root() const { return B_; }
  const Eigen::MatrixXd& gram_abs_sq() const { return Q_abs2_; }
  const Eigen::VectorXd& wl() const { return wl_; }
  bool real_transverse() const { return real_transverse_; }
  std::size_t memory_limit() const { return memory_limit_; }

  // Unit vector representing W(x) exp(i<k, x_l>) (same for every k).
  const Eigen::VectorXcd& phi() const { return phi_; }

  // (D (x) B) applied to a state, D = diag(wl).
  Eigen::MatrixXcd weight(const Eigen::MatrixXcd& Y) const;

 private:
  Potential pot_;
  std::vector<DualMode> modes_;
  Eigen::MatrixXcd Q_;
  Eigen::MatrixXcd B_;
  Eigen::MatrixXd Q_abs2_;
  Eigen::VectorXd wl_;
  Eigen::VectorXcd phi_;
  bool real_transverse_ = false;
  std::size_t memory_limit_;
};

enum class OpKind { Gamma, C, C0, LambdaP, P, Derivative, Difference };

const char* to_string(OpKind kind);

// A_hat = (D (x) B) blockdiag(T_K) (D (x) B), T_K the kink-corrected Nystrom
// matrix of channel K. Empty blocks are zero.
struct DiscretizedOp {
  OpKind kind = OpKind::Gamma;
  QuasiMomentum k;
  cplx z;
  std::shared_ptr<const Model> model;
  std::vector<Eigen::MatrixXcd> blocks;
  bool hermitian = false;

  int dim() const { return model->dim(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& y) const;
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& y) const;
  // Dense matrix; refuses dimensions above max_dim.
  Eigen::MatrixXcd to_dense(int max_dim = 4000) const;
  double frobenius() const;
  DiscretizedOp adjoint() const;
};

DiscretizedOp operator-(const DiscretizedOp& a, const DiscretizedOp& b);
DiscretizedOp operator+(const DiscretizedOp& a, const DiscretizedOp& b);
DiscretizedOp operator*(cplx s, const DiscretizedOp& a);

// Per-channel dispersion roots at z = E + i eps, in mode order.
std::vector<cplx> channel_roots(const Model& model, const QuasiMomentum& k, double E, double eps);

// Pointwise truncated kernel, points given as (x1, x2, x3).
cplx gamma_kernel(const Potential& pot, const std::array<double, 3>& x,
                  const std::array<double, 3>& y, const QuasiMomentum& k, double E, double eps,
                  int M);

DiscretizedOp assemble_gamma(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                             double eps);

struct Decomposition {
  cplx Lambda;
  DiscretizedOp P;
  DiscretizedOp C;
};

cplx lambda_coefficient(const LatticeGeometry& lat, const QuasiMomentum& k, double E, double eps);

Decomposition assemble_decomposition(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                     double E, double eps);

DiscretizedOp assemble_C0(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E);

// d Gamma / d k_j at real E (j = 0 for k2, 1 for k3).
DiscretizedOp assemble_gamma_dk(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                double E, int j);

// Matrix-free route: zero-padded FFT per channel and division by the symbol
// xi^2 + |k+K|^2 - z.
Eigen::VectorXcd apply_gamma_spectral(const Model& model, const Eigen::VectorXcd& y,
                                      const QuasiMomentum& k, cplx z);

// Outgoing-channel resolvent (-d^2/dx^2 - p^2)^{-1} applied by zero-padded FFT.
// f sits at buffer offset `offset` on spacing h; the result is returned on
// buffer nodes 0..n_out-1. Requires Im p > 0.
Eigen::VectorXcd resolve_channel(const Eigen::VectorXcd& f, double h, cplx p, int offset, int n_out);

double hs_norm(const DiscretizedOp& op);

// Bound on the HS norm of C from the kink-regular and evanescent-channel parts.
double bound_c(const Potential& pot, double delta);

struct LimitRates {
  Region region = Region::BEPlus;
  std::vector<double> eps;
  std::vector<double> plus;   // ||Gamma(E + i eps) - Gamma(E)||
  std::vector<double> minus;  // ||Gamma(E - i eps) - Gamma(E)||
  double slope_plus = 0.0;
  double slope_minus = 0.0;
  // B_E^- only
  std::vector<double> c_plus;   // ||C(E + i eps) - C(E)||
  std::vector<double> c_minus;  // ||C(E - i eps) - C(E)||
  double slope_c_plus = 0.0;
  double slope_c_minus = 0.0;
  std::vector<double> limit_defect;      // ||Gamma(E - i eps) - (Gamma(E) - 2 C0(E))||
  std::vector<double> adjoint_defect;    // ||Gamma(E - i eps) - Gamma(E)^*||
  double gamma_norm = 0.0;
};

LimitRates limit_rates(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                       const std::vector<double>& eps_sequence);

}  // namespace bsop
