#include "bsop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bsop/errors.hpp"

namespace bsop {

double QuasiMomentum::norm() const { return std::hypot(k2, k3); }

const char* to_string(Region r) {
  switch (r) {
    case Region::BEPlus: return "B_E_plus";
    case Region::BEMinus: return "B_E_minus";
    case Region::Boundary: return "boundary";
  }
  return "unknown";
}

LatticeGeometry make_lattice(double a2_len, double a3_len) {
  if (!(a2_len > 0.0) || !(a3_len > 0.0) || !std::isfinite(a2_len) || !std::isfinite(a3_len)) {
    throw Error(ErrorKind::Domain, "lattice lengths must be positive and finite");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  LatticeGeometry lat;
  lat.a2_len = a2_len;
  lat.a3_len = a3_len;
  lat.b2_len = two_pi / a2_len;
  lat.b3_len = two_pi / a3_len;
  lat.cell_area_S = a2_len * a3_len;
  lat.cell_area_B = lat.b2_len * lat.b3_len;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  lat.beta = lat.cell_area_B / (16.0 * pi2);
  lat.green_coeff = lat.cell_area_B / (8.0 * pi2);
  return lat;
}

CellCoords to_cell_coords(const LatticeGeometry& lat, const QuasiMomentum& k) {
  return {k.k2 / lat.b2_len, k.k3 / lat.b3_len};
}

QuasiMomentum from_cell_coords(const LatticeGeometry& lat, const CellCoords& t) {
  return {t.t2 * lat.b2_len, t.t3 * lat.b3_len};
}

bool in_brillouin_cell(const LatticeGeometry& lat, const QuasiMomentum& k) {
  const auto t = to_cell_coords(lat, k);
  return t.t2 > -0.5 && t.t2 <= 0.5 && t.t3 > -0.5 && t.t3 <= 0.5;
}

double energy_threshold(const LatticeGeometry& lat, double delta) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::Domain, "delta must be nonnegative");
  const double bmin = std::min(lat.b2_len, lat.b3_len);
  return bmin * bmin / (4.0 * (1.0 + delta));
}

std::vector<DualMode> enumerate_modes(const LatticeGeometry& lat, int M) {
  if (M < 0) throw Error(ErrorKind::Domain, "mode cutoff must be nonnegative");
  std::vector<DualMode> modes;
  modes.reserve(static_cast<std::size_t>((2 * M + 1) * (2 * M + 1)));
  for (int shell = 0; shell <= M; ++shell) {
    for (int n2 = -shell; n2 <= shell; ++n2) {
      for (int n3 = -shell; n3 <= shell; ++n3) {
        if (std::max(std::abs(n2), std::abs(n3)) != shell) continue;
        modes.push_back({n2, n3, n2 * lat.b2_len, n3 * lat.b3_len});
      }
    }
  }
  return modes;
}

double shifted_norm_sq(const QuasiMomentum& k, const DualMode& K) {
  const double q2 = k.k2 + K.K2;
  const double q3 = k.k3 + K.K3;
  return q2 * q2 + q3 * q3;
}

DispersionRoot dispersion_root(double k_plus_K_norm_sq, double E, double eps) {
  const double a = E - k_plus_K_norm_sq;
  DispersionRoot r;
  if (eps == 0.0) {
    if (a == 0.0) throw Error(ErrorKind::SingularDispersion, "channel on the energy shell with eps = 0");
    if (a > 0.0) {
      r.p_R = std::sqrt(a);
    } else {
      r.p_I = std::sqrt(-a);
    }
    return r;
  }
  // Cancellation-free branches of sqrt((|w| -+ a)/2).
  const double mod = std::hypot(a, eps);
  if (a <= 0.0) {
    r.p_I = std::sqrt(0.5 * (mod - a));
    r.p_R = eps / (2.0 * r.p_I);
  } else {
    const double pr_abs = std::sqrt(0.5 * (mod + a));
    r.p_I = std::abs(eps) / (2.0 * pr_abs);
    r.p_R = eps / (2.0 * r.p_I);
  }
  return r;
}

double dispersion_minorant(const LatticeGeometry& lat, const DualMode& K, double delta) {
  const double e_delta = energy_threshold(lat, delta);
  double s = 0.0;
  for (int n : {K.n2, K.n3}) {
    if (n == 0) continue;
    const double t = 2.0 * std::abs(n) - 1.0;
    s += t * t;
  }
  const double arg = (1.0 + delta) * s - 1.0;
  return arg > 0.0 ? std::sqrt(arg * e_delta) : 0.0;
}

SummabilityResult summability_sum(const LatticeGeometry& lat, const QuasiMomentum& k, double E,
                                  double mu, int M, double delta) {
  if (!(mu > 2.0)) throw Error(ErrorKind::DivergentSum, "exponent must exceed 2");
  const double e_delta = energy_threshold(lat, delta);
  if (!(E > 0.0 && E < e_delta)) throw Error(ErrorKind::Domain, "energy outside (0, E_delta)");

  SummabilityResult out;
  for (const auto& K : enumerate_modes(lat, M)) {
    if (K.is_zero()) continue;
    const auto p = dispersion_root(shifted_norm_sq(k, K), E, 0.0);
    out.value += std::pow(p.p_I, -mu);
  }

  // Shell m beyond M: every mode has a coordinate with |n| = m, so the
  // minorant is at least ((1+delta)(2m-1)^2 - 1)^{1/2} E_delta^{1/2}.
  const double scale = std::pow((1.0 + delta) * e_delta, -0.5 * mu);
  const int explicit_shells = 20000;
  const int m_end = M + explicit_shells;
  double tail = 0.0;
  for (int m = M + 1; m <= m_end; ++m) {
    const double t = 2.0 * m - 1.0;
    const double arg = (1.0 + delta) * t * t - 1.0;
    if (arg <= 0.0) return {out.value, std::numeric_limits<double>::infinity()};
    tail += 8.0 * m * std::pow(arg * e_delta, -0.5 * mu);
  }
  // Remaining shells: 8m <= 16(m-1) and the minorant exceeds 2(m-1)((1+delta)E_delta)^{1/2}.
  const double m0 = static_cast<double>(m_end);
  tail += 16.0 * scale * std::pow(2.0, -mu) * std::pow(m0 - 1.0, 2.0 - mu) / (mu - 2.0);
  out.tail_bound = tail;
  return out;
}

double summability_constant(const LatticeGeometry& lat, double mu, double delta) {
  if (!(mu > 2.0)) throw Error(ErrorKind::DivergentSum, "exponent must exceed 2");
  const double e_delta = energy_threshold(lat, delta);
  const int shells = 400;
  double sum = 0.0;
  for (int n2 = -shells; n2 <= shells; ++n2) {
    for (int n3 = -shells; n3 <= shells; ++n3) {
      if (n2 == 0 && n3 == 0) continue;
      const double m = dispersion_minorant(lat, {n2, n3, 0.0, 0.0}, delta);
      if (m <= 0.0) return std::numeric_limits<double>::infinity();
      sum += std::pow(m, -mu);
    }
  }
  const double scale = std::pow((1.0 + delta) * e_delta, -0.5 * mu);
  sum += 16.0 * scale * std::pow(2.0, -mu) * std::pow(shells - 1.0, 2.0 - mu) / (mu - 2.0);
  return sum;
}

Region classify(const QuasiMomentum& k, double E) {
  if (!(E > 0.0)) throw Error(ErrorKind::Domain, "energy must be positive");
  const double d = k.norm_sq() - E;
  if (std::abs(d) < kBoundaryTolerance) return Region::Boundary;
  return d > 0.0 ? Region::BEPlus : Region::BEMinus;
}

}  // namespace bsop
