#pragma once

#include <array>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bsop/geometry.hpp"
#include "bsop/kink_quadrature.hpp"

namespace bsop {

// Real-space sampling of R x S: x1 nodes -L + i h, transverse cell midpoints
// (row-major in a2, a3), and the full set of n_ell^2 resolvable dual modes.
class LapGrid {
 public:
  LapGrid(LatticeGeometry lat, double L, int N1, int n_ell);

  const LatticeGeometry& lattice() const { return lat_; }
  double L() const { return L_; }
  int n1() const { return n1_; }
  int n_ell() const { return n_ell_; }
  double h() const { return 2.0 * L_ / n1_; }
  double x(int i) const { return -L_ + i * h(); }
  const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
  const std::vector<DualMode>& modes() const { return modes_; }
  double transverse_weight() const { return lat_.cell_area_S / (n_ell_ * n_ell_); }

 private:
  LatticeGeometry lat_;
  double L_;
  int n1_;
  int n_ell_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<DualMode> modes_;
};

// Channel representation: column K holds the x1 samples (x0 + i h) of the
// coefficient of u against exp(i<k+K, x>) / |S|^{1/2}.
struct Channels {
  double h = 0.0;
  double x0 = 0.0;
  std::vector<DualMode> modes;
  Eigen::MatrixXcd values;

  int n() const { return static_cast<int>(values.rows()); }
  double x(int i) const { return x0 + i * h; }
  double norm() const;
  // ||(1 + x1^2)^{sigma/2} u||; sigma may be negative
  double weighted_norm(double sigma) const;
};

// Real-space states are n1 x n_ell^2 matrices of samples.
double real_space_norm(const Eigen::MatrixXcd& u, const LapGrid& grid);
Channels transverse_project(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k);
Eigen::MatrixXcd transverse_synthesize(const Channels& c, const LapGrid& grid, const QuasiMomentum& k);

// Row m holds frequency xi_m = (m - n/2) dxi, column K the mode.
struct GFTCoefficients {
  double dxi = 0.0;
  double x0 = 0.0;
  std::vector<DualMode> modes;
  Eigen::MatrixXcd values;

  double xi(int m) const { return (m - values.rows() / 2) * dxi; }
  double norm() const;  // (sum |u~|^2 dxi)^{1/2}
};

GFTCoefficients channel_gft(const Channels& c);
Channels channel_igft(const GFTCoefficients& g, double h);
GFTCoefficients gft(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k);
Eigen::MatrixXcd igft(const GFTCoefficients& g, const LapGrid& grid, const QuasiMomentum& k);

// Coefficient of column `mode` at an arbitrary frequency, by direct quadrature.
cplx gft_at(const Channels& c, int mode, double xi);

// | ||u||^2 - sum |u~|^2 dxi | / ||u||^2
double parseval_defect(const Eigen::MatrixXcd& u, const LapGrid& grid, const QuasiMomentum& k);

enum class Branch { Complex, Plus, Minus };  // z off the real axis, E + i0, E - i0

struct SpectralPoint {
  cplx z;
  Branch branch = Branch::Complex;
};

// R0(k, z) f per channel: zero-padded symbol division on channels with
// Im p > 0, the outgoing (Plus) or incoming (Minus) kernel convolution on open
// channels, and the kernel -|x1 - y1| / 2 on a threshold channel whose
// coefficient at xi = 0 vanishes. pad_nodes extends the output grid on both
// sides (closed channels only).
Channels apply_R0(const Channels& f, const QuasiMomentum& k, const SpectralPoint& z, int pad_nodes = 0);

// (H0(k) - z) u with the periodic symbol xi^2 + |k+K|^2 - z on u's grid.
Channels apply_H0_minus(const Channels& u, const QuasiMomentum& k, cplx z);

// Output padding that lets every closed channel decay by exp(-decay_lengths).
int decay_padding(const Channels& f, const QuasiMomentum& k, cplx z, double decay_lengths = 40.0);

// ||(H0 - z) R0 f - f|| / ||f|| on a padded grid; z must leave every channel closed.
double resolvent_identity_defect(const Channels& f, const QuasiMomentum& k, cplx z);

// Per-channel norms of R0(E + i0) f - R0(E - i0) f.
std::vector<double> branch_difference(const Channels& f, const QuasiMomentum& k, double E);

struct LapConvergence {
  Region region = Region::BEPlus;
  double sigma = 0.0;
  std::vector<double> eps;
  std::vector<double> diff;  // ||R0(E +- i eps) f - R0(E +- i0) f||_{H_{-sigma}}
  double rate = 0.0;         // fitted log-log slope
};

LapConvergence lap_convergence(const Channels& f, const QuasiMomentum& k, double E,
                               const std::vector<double>& eps_sequence, double sigma,
                               Branch branch = Branch::Plus);

// |<eps R0(E +- i eps) f, v>| for each eps
std::vector<double> eps_pairings(const Channels& f, const Channels& v, const QuasiMomentum& k, double E,
                                 const std::vector<double>& eps_sequence, Branch branch = Branch::Plus);

// 2^{1-alpha} (2 pi)^{-1/2} (int (1 + x^2)^{alpha - sigma} dx)^{1/2}
double holder_constant(double sigma, double alpha);

struct HolderReport {
  double max_ratio = 0.0;
  double constant = 0.0;
  bool pass() const { return std::isfinite(max_ratio) && max_ratio <= constant; }
};

HolderReport holder_estimate(const Channels& u, double sigma, double alpha, int mode,
                             const std::vector<std::pair<double, double>>& xi_pairs);

// ||(1 + H0(k)) (1 + x1^2)^{sigma/2} u||
double h2_weighted_norm(const Channels& u, const QuasiMomentum& k, double sigma);

struct NormEquivalence {
  double lower_ratio = 0.0;  // min over the batch of ||R0 f||_{H^{2,sigma}} / ||f||_{H_sigma}
  double upper_ratio = 0.0;
};

NormEquivalence weighted_norm_equiv(const std::vector<Channels>& batch, const QuasiMomentum& k, double E,
                                    cplx z, double sigma);

// Smooth random channels: a few complex Gaussian bumps per column.
Eigen::MatrixXcd smooth_random_channels(const std::vector<double>& x, int columns, std::mt19937_64& rng,
                                        double center_range = 10.0);

}  // namespace bsop
