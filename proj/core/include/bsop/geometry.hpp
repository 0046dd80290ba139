#pragma once

#include <complex>
#include <vector>

namespace bsop {

// Orthogonal lattice of periods in the (x2, x3) plane and its dual.
struct LatticeGeometry {
  double a2_len = 0.0;
  double a3_len = 0.0;
  double b2_len = 0.0;
  double b3_len = 0.0;
  double cell_area_S = 0.0;
  double cell_area_B = 0.0;
  double beta = 0.0;  // |B| / (16 pi^2)
  // Coefficient of the lattice Green kernel of W R0 W for H0 = -Laplacian:
  // |B| / (8 pi^2) = 1 / (2 |S|). Used for Lambda, q_- and q_+.
  double green_coeff = 0.0;
};

struct QuasiMomentum {
  double k2 = 0.0;
  double k3 = 0.0;

  double norm_sq() const { return k2 * k2 + k3 * k3; }
  double norm() const;
};

// Coordinates in the dual basis, t_j = k_j / |b_j|.
struct CellCoords {
  double t2 = 0.0;
  double t3 = 0.0;
};

CellCoords to_cell_coords(const LatticeGeometry& lat, const QuasiMomentum& k);
QuasiMomentum from_cell_coords(const LatticeGeometry& lat, const CellCoords& t);
bool in_brillouin_cell(const LatticeGeometry& lat, const QuasiMomentum& k);

struct DualMode {
  int n2 = 0;
  int n3 = 0;
  double K2 = 0.0;
  double K3 = 0.0;

  bool is_zero() const { return n2 == 0 && n3 == 0; }
};

struct DispersionRoot {
  double p_R = 0.0;
  double p_I = 0.0;

  std::complex<double> value() const { return {p_R, p_I}; }
};

enum class Region { BEPlus, BEMinus, Boundary };

const char* to_string(Region r);

LatticeGeometry make_lattice(double a2_len, double a3_len);

double energy_threshold(const LatticeGeometry& lat, double delta);

// Spiral order: shells of max(|n2|,|n3|), lexicographic within a shell.
std::vector<DualMode> enumerate_modes(const LatticeGeometry& lat, int M);

double shifted_norm_sq(const QuasiMomentum& k, const DualMode& K);

DispersionRoot dispersion_root(double k_plus_K_norm_sq, double E, double eps);

struct SummabilityResult {
  double value = 0.0;
  double tail_bound = 0.0;
};

// Sum over K != 0 with |n_j| <= M of p_I(k+K, E)^(-mu); the tail bound
// sums the lower bound on p_I over all shells beyond M.
SummabilityResult summability_sum(const LatticeGeometry& lat, const QuasiMomentum& k, double E,
                                  double mu, int M, double delta);

// Lower bound on p_I(k+K, E) valid for E < E_delta and K != 0.
double dispersion_minorant(const LatticeGeometry& lat, const DualMode& K, double delta);

// Upper bound on sum over all K != 0 of p_I(k+K, E)^(-mu), uniform in k and
// E < E_delta, from the minorant. Infinite when delta = 0.
double summability_constant(const LatticeGeometry& lat, double mu, double delta);

constexpr double kBoundaryTolerance = 1e-14;

Region classify(const QuasiMomentum& k, double E);

}  // namespace bsop
