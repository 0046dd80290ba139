#include "bsop/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bsop/errors.hpp"

namespace bsop {

namespace {

double smooth_bump(double t) {
  // exp(1 - 1/(1 - t^2)) on |t| < 1, peak value 1 at t = 0
  const double s = 1.0 - t * t;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s);
}

double wrap_centered(double x, double a) { return x - a * std::floor(x / a + 0.5); }

}  // namespace

void validate_grid(const Grid& grid) {
  if (!(grid.L > 0.0)) throw Error(ErrorKind::Domain, "grid half-length must be positive");
  if (grid.N1 < 16 || grid.N1 % 2 != 0) throw Error(ErrorKind::Domain, "N1 must be even and >= 16");
  if (grid.M < 0) throw Error(ErrorKind::Domain, "mode cutoff must be nonnegative");
  if (grid.n_ell < 2 * grid.M + 1) {
    throw Error(ErrorKind::Domain, "n_ell must be at least 2M+1 to resolve the transverse modes");
  }
}

double longitudinal_profile(const PotentialSpec& spec, double x1) {
  switch (spec.longitudinal) {
    case LongitudinalKind::Rational: return std::pow(1.0 + x1 * x1, -spec.q);
    case LongitudinalKind::Gaussian: return std::exp(-x1 * x1 / (2.0 * spec.sigma * spec.sigma));
    case LongitudinalKind::CompactBump: return smooth_bump(x1 / spec.R);
  }
  return 0.0;
}

double transverse_profile(const PotentialSpec& spec, const LatticeGeometry& lat, double x2,
                          double x3) {
  switch (spec.transverse) {
    case TransverseKind::Constant: return 1.0;
    case TransverseKind::Bump: {
      const double y2 = wrap_centered(x2, lat.a2_len);
      const double y3 = wrap_centered(x3, lat.a3_len);
      const double radius = spec.rho * std::min(lat.a2_len, lat.a3_len);
      return smooth_bump(std::hypot(y2, y3) / radius);
    }
    case TransverseKind::Fourier: {
      double s = 0.0;
      for (const auto& t : spec.terms) {
        const double ph = t.n2 * lat.b2_len * x2 + t.n3 * lat.b3_len * x3;
        s += t.re * std::cos(ph) - t.im * std::sin(ph);
      }
      return s;
    }
  }
  return 0.0;
}

Potential::Potential(PotentialSpec spec, LatticeGeometry lat, Grid grid)
    : spec_(std::move(spec)), lat_(lat), grid_(grid) {
  validate_grid(grid_);
  if (spec_.longitudinal == LongitudinalKind::Rational && !(spec_.q > 0.0)) {
    throw Error(ErrorKind::Domain, "rational exponent must be positive");
  }
  if (spec_.longitudinal == LongitudinalKind::Gaussian && !(spec_.sigma > 0.0)) {
    throw Error(ErrorKind::Domain, "gaussian width must be positive");
  }
  if (spec_.longitudinal == LongitudinalKind::CompactBump && !(spec_.R > 0.0)) {
    throw Error(ErrorKind::Domain, "bump support must be positive");
  }
  if (spec_.transverse == TransverseKind::Bump && !(spec_.rho > 0.0 && spec_.rho <= 0.5)) {
    throw Error(ErrorKind::Domain, "transverse bump radius fraction must lie in (0, 0.5]");
  }

  const int n = grid_.n_ell;
  const double h2 = lat_.a2_len / n;
  const double h3 = lat_.a3_len / n;
  ht2_ = h2 * h3;
  nodes_.reserve(static_cast<std::size_t>(n * n));
  bt_.reserve(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      const double x2 = -0.5 * lat_.a2_len + (a + 0.5) * h2;
      const double x3 = -0.5 * lat_.a3_len + (c + 0.5) * h3;
      const double bv = b(x2, x3);
      if (bv < -1e-14) throw Error(ErrorKind::Domain, "transverse profile is negative at a node");
      nodes_.push_back({x2, x3});
      bt_.push_back(std::max(bv, 0.0));
    }
  }
  sup_b_ = *std::max_element(bt_.begin(), bt_.end());

  wl_.resize(static_cast<std::size_t>(grid_.N1));
  double sw = 0.0;
  for (int i = 0; i < grid_.N1; ++i) {
    wl_[i] = w(grid_.x(i));
    sw += wl_[i] * wl_[i];
  }
  double sb = 0.0;
  for (double v : bt_) sb += v * v;
  const double norm2 = grid_.h() * sw * ht2_ * sb;
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw Error(ErrorKind::Degenerate, "potential vanishes on the grid");
  }
  scale_ = 1.0 / std::sqrt(norm2);
  for (auto& v : wl_) v *= scale_;
}

double Potential::quadrature_norm() const {
  double sw = 0.0;
  for (double v : wl_) sw += v * v;
  double sb = 0.0;
  for (double v : bt_) sb += v * v;
  return std::sqrt(grid_.h() * sw * ht2_ * sb);
}

double Potential::sup_w() const {
  // all profiles peak at x1 = 0 with value 1
  return 1.0;
}

double Potential::weighted_norm_h1() const {
  double s = 0.0;
  for (int i = 0; i < grid_.N1; ++i) {
    const double x = grid_.x(i);
    s += (1.0 + x * x) * wl_[i] * wl_[i];
  }
  double sb = 0.0;
  for (double v : bt_) sb += v * v;
  return std::sqrt(grid_.h() * s * ht2_ * sb);
}

double Potential::norm_l2_linf() const {
  double s = 0.0;
  for (double v : wl_) s += v * v;
  return std::sqrt(grid_.h() * s) * sup_b_;
}

Potential build_potential(const PotentialSpec& spec, const LatticeGeometry& lat, const Grid& grid) {
  return Potential(spec, lat, grid);
}

double default_box_half_length(const PotentialSpec& spec, double tol) {
  double L = 0.0;
  switch (spec.longitudinal) {
    case LongitudinalKind::Rational: L = std::sqrt(std::pow(tol, -1.0 / spec.q) - 1.0); break;
    case LongitudinalKind::Gaussian: L = spec.sigma * std::sqrt(-2.0 * std::log(tol)); break;
    case LongitudinalKind::CompactBump: L = spec.R; break;
  }
  return 2.0 * std::ceil(L / 2.0);
}

DecayMargin decay_margin(const PotentialSpec& spec, double L, int samples, double margin) {
  if (samples < 4 || !(L > 0.0)) throw Error(ErrorKind::Estimation, "need at least 4 samples on a positive box");
  std::vector<double> lx, ly;
  for (int i = 0; i < samples; ++i) {
    const double x = 0.5 * L * std::pow(2.0, static_cast<double>(i) / (samples - 1));
    const double v = longitudinal_profile(spec, x);
    if (!(v > std::numeric_limits<double>::min())) {
      // faster than any power on the window
      return {std::numeric_limits<double>::infinity(), true};
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(v));
  }
  const double n = static_cast<double>(samples);
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < samples; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < samples; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double exponent = -sxy / sxx;
  return {exponent, exponent >= 1.5 + margin};
}

TransverseFourierSq transverse_fourier_sq(const Potential& pot, const DualMode& K, int quad_nodes) {
  const auto& lat = pot.lattice();
  const int n = quad_nodes;
  const double h2 = lat.a2_len / n;
  const double h3 = lat.a3_len / n;
  std::complex<double> acc = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      const double x2 = -0.5 * lat.a2_len + (a + 0.5) * h2;
      const double x3 = -0.5 * lat.a3_len + (c + 0.5) * h3;
      const double bv = pot.b(x2, x3);
      acc += bv * bv * std::polar(1.0, -(K.K2 * x2 + K.K3 * x3));
    }
  }
  const double s = pot.scale();
  const std::complex<double> coeff = acc * h2 * h3 * s * s / std::sqrt(lat.cell_area_S);
  const PotentialSpec spec = pot.spec();
  return {coeff, [coeff, spec](double x1) {
            const double wv = longitudinal_profile(spec, x1);
            return coeff * wv * wv;
          }};
}

HalfspaceFlags halfspace_flags(const PotentialSpec& spec) {
  HalfspaceFlags f;
  f.c4_smooth_transverse = true;
  f.vanishes_near_boundary = spec.transverse == TransverseKind::Bump && spec.rho < 0.5;
  if (spec.longitudinal == LongitudinalKind::CompactBump) {
    f.vanishes_on_halfspace = true;
    f.halfspace_start = spec.R;
  }
  return f;
}

}  // namespace bsop
