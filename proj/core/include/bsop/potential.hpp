#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "bsop/geometry.hpp"

namespace bsop {

// Truncated longitudinal box and transverse sampling.
struct Grid {
  double L = 40.0;
  int N1 = 256;
  int M = 2;
  int n_ell = 9;

  double h() const { return 2.0 * L / N1; }
  double x(int i) const { return -L + i * h(); }
  int mode_count() const { return (2 * M + 1) * (2 * M + 1); }
  int dim() const { return N1 * mode_count(); }
};

void validate_grid(const Grid& grid);

enum class LongitudinalKind { Rational, Gaussian, CompactBump };
enum class TransverseKind { Constant, Bump, Fourier };

// b(x) += Re((re + i im) exp(i <K, x>)) with K = n2 b2 + n3 b3.
struct FourierTerm {
  int n2 = 0;
  int n3 = 0;
  double re = 0.0;
  double im = 0.0;
};

struct PotentialSpec {
  LongitudinalKind longitudinal = LongitudinalKind::Rational;
  double q = 2.0;      // rational: (1 + x^2)^(-q)
  double sigma = 1.0;  // gaussian: exp(-x^2 / (2 sigma^2))
  double R = 5.0;      // compact bump supported on [-R, R]

  TransverseKind transverse = TransverseKind::Bump;
  double rho = 0.4;  // bump radius as a fraction of the shorter period
  std::vector<FourierTerm> terms;
};

struct HalfspaceFlags {
  bool c4_smooth_transverse = false;
  bool vanishes_near_boundary = false;
  bool vanishes_on_halfspace = false;
  double halfspace_start = 0.0;  // W = 0 on (halfspace_start, inf) when flagged
};

double longitudinal_profile(const PotentialSpec& spec, double x1);
// Transverse cell is centred at the origin: [-a2/2, a2/2) x [-a3/2, a3/2).
double transverse_profile(const PotentialSpec& spec, const LatticeGeometry& lat, double x2,
                          double x3);

class Potential {
 public:
  Potential(PotentialSpec spec, LatticeGeometry lat, Grid grid);

  const PotentialSpec& spec() const { return spec_; }
  const LatticeGeometry& lattice() const { return lat_; }
  const Grid& grid() const { return grid_; }

  double scale() const { return scale_; }
  double w(double x1) const { return longitudinal_profile(spec_, x1); }
  double b(double x2, double x3) const { return transverse_profile(spec_, lat_, x2, x3); }
  double operator()(double x1, double x2, double x3) const { return scale_ * w(x1) * b(x2, x3); }

  // scale * w(x_i) at the longitudinal nodes.
  const std::vector<double>& longitudinal_samples() const { return wl_; }
  // Transverse nodes (x2, x3) and b at those nodes, row-major in (a2, a3).
  const std::vector<std::array<double, 2>>& transverse_nodes() const { return nodes_; }
  const std::vector<double>& transverse_samples() const { return bt_; }
  double transverse_weight() const { return ht2_; }

  double quadrature_norm() const;
  double sup_w() const;
  double sup_b() const { return sup_b_; }
  // (int (1 + x1^2) W^2)^{1/2} by quadrature on the box
  double weighted_norm_h1() const;
  // (int sup_{x_l} W^2 dx1)^{1/2}
  double norm_l2_linf() const;
  double norm_linf() const { return scale_ * sup_w() * sup_b_; }

 private:
  PotentialSpec spec_;
  LatticeGeometry lat_;
  Grid grid_;
  double scale_ = 1.0;
  double ht2_ = 0.0;
  double sup_b_ = 0.0;
  std::vector<double> wl_;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<double> bt_;
};

Potential build_potential(const PotentialSpec& spec, const LatticeGeometry& lat, const Grid& grid);

// Smallest half-length with sup W(L, .) below tol (unnormalized profile
// relative to its peak), rounded up to a multiple of 2.
double default_box_half_length(const PotentialSpec& spec, double tol = 1e-8);

struct DecayMargin {
  double exponent = 0.0;
  bool pass = false;
};

DecayMargin decay_margin(const PotentialSpec& spec, double L = 1000.0, int samples = 64,
                         double margin = 1e-3);

// (W^2)_K(x1) = coefficient * w(x1)^2, the transverse Fourier coefficient of
// W^2 against exp(i<K, x>) / |S|^{1/2}.
struct TransverseFourierSq {
  std::complex<double> coefficient;
  std::function<std::complex<double>(double)> eval;
};

TransverseFourierSq transverse_fourier_sq(const Potential& pot, const DualMode& K,
                                          int quad_nodes = 64);

HalfspaceFlags halfspace_flags(const PotentialSpec& spec);

}  // namespace bsop
