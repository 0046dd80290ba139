#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bsop/errors.hpp"
#include "bsop/potential.hpp"

namespace bsop {
namespace {

constexpr double kPi = std::numbers::pi;

LatticeGeometry square() { return make_lattice(2 * kPi, 2 * kPi); }

TEST(Potential, UnitQuadratureNorm) {
  const Grid grid{20.0, 128, 1, 5};
  for (auto lk : {LongitudinalKind::Rational, LongitudinalKind::Gaussian, LongitudinalKind::CompactBump}) {
    PotentialSpec spec;
    spec.longitudinal = lk;
    const auto pot = build_potential(spec, square(), grid);
    EXPECT_NEAR(pot.quadrature_norm(), 1.0, 1e-12);
    EXPECT_GT(pot.scale(), 0.0);
  }
}

TEST(Potential, ConstantTransverseScaleMatchesClosedForm) {
  // Gaussian of width 1 on a box long enough that the sum equals the integral.
  PotentialSpec spec;
  spec.longitudinal = LongitudinalKind::Gaussian;
  spec.transverse = TransverseKind::Constant;
  const Grid grid{20.0, 256, 0, 3};
  const auto lat = square();
  const auto pot = build_potential(spec, lat, grid);
  const double int_w2 = std::sqrt(kPi);
  EXPECT_NEAR(pot.scale(), 1.0 / std::sqrt(int_w2 * lat.cell_area_S), 1e-12);
  EXPECT_NEAR(pot.norm_linf(), pot.scale(), 1e-15);
}

TEST(Potential, CompactBumpVanishesOutsideSupport) {
  PotentialSpec spec;
  spec.longitudinal = LongitudinalKind::CompactBump;
  spec.R = 5.0;
  const auto pot = build_potential(spec, square(), Grid{20.0, 128, 1, 5});
  for (double x : {5.0, 5.5, -7.0, 19.0}) EXPECT_EQ(pot.w(x), 0.0);
  EXPECT_GT(pot.w(4.9), 0.0);
  EXPECT_EQ(default_box_half_length(spec), 6.0);
}

TEST(Potential, TransverseBumpIsPeriodicAndSupportedInDisk) {
  PotentialSpec spec;
  const auto lat = square();
  const auto pot = build_potential(spec, lat, Grid{20.0, 128, 1, 5});
  EXPECT_NEAR(pot.b(0.3, -0.7), pot.b(0.3 + lat.a2_len, -0.7 - 2 * lat.a3_len), 1e-14);
  EXPECT_EQ(pot.b(0.5 * lat.a2_len, 0.0), 0.0);
  EXPECT_EQ(pot.b(0.0, 0.0), 1.0);
  for (double v : pot.transverse_samples()) EXPECT_GE(v, 0.0);
}

TEST(Potential, DecayMargin) {
  PotentialSpec q2;
  const auto a = decay_margin(q2);
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.exponent, 4.0, 1e-3);

  PotentialSpec gauss;
  gauss.longitudinal = LongitudinalKind::Gaussian;
  EXPECT_TRUE(decay_margin(gauss).pass);

  PotentialSpec slow;
  slow.q = 0.5;
  const auto c = decay_margin(slow);
  EXPECT_FALSE(c.pass);
  EXPECT_NEAR(c.exponent, 1.0, 1e-3);

  PotentialSpec edge;
  edge.q = 0.75;
  EXPECT_FALSE(decay_margin(edge).pass);
  EXPECT_THROW(decay_margin(q2, 1000.0, 2), Error);
}

TEST(Potential, HalfspaceFlags) {
  PotentialSpec spec;
  auto f = halfspace_flags(spec);
  EXPECT_TRUE(f.c4_smooth_transverse);
  EXPECT_TRUE(f.vanishes_near_boundary);
  EXPECT_FALSE(f.vanishes_on_halfspace);

  spec.longitudinal = LongitudinalKind::CompactBump;
  spec.R = 3.0;
  f = halfspace_flags(spec);
  EXPECT_TRUE(f.vanishes_on_halfspace);
  EXPECT_EQ(f.halfspace_start, 3.0);

  spec.transverse = TransverseKind::Constant;
  EXPECT_FALSE(halfspace_flags(spec).vanishes_near_boundary);
}

TEST(TransverseFourier, ConstantProfileHasOnlyZeroMode) {
  PotentialSpec spec;
  spec.transverse = TransverseKind::Constant;
  const auto lat = square();
  const auto pot = build_potential(spec, lat, Grid{20.0, 128, 1, 5});
  for (const auto& K : enumerate_modes(lat, 2)) {
    const auto t = transverse_fourier_sq(pot, K);
    if (K.is_zero()) {
      EXPECT_NEAR(t.coefficient.real(), pot.scale() * pot.scale() * std::sqrt(lat.cell_area_S), 1e-12);
    } else {
      EXPECT_LT(std::abs(t.coefficient), 1e-13);
    }
  }
}

TEST(TransverseFourier, ZeroModeMatchesRadialQuadrature) {
  PotentialSpec spec;
  const auto lat = square();
  const auto pot = build_potential(spec, lat, Grid{20.0, 128, 1, 5});
  // int_S b^2 over the disk of radius rho a, by a fine radial rule
  const double r0 = spec.rho * lat.a2_len;
  const int n = 20000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * r0 / n;
    const double t = r / r0;
    const double b = std::exp(1.0 - 1.0 / (1.0 - t * t));
    acc += 2 * kPi * r * b * b * r0 / n;
  }
  const double expected = acc * pot.scale() * pot.scale() / std::sqrt(lat.cell_area_S);
  const auto t = transverse_fourier_sq(pot, {0, 0, 0.0, 0.0}, 256);
  EXPECT_NEAR(t.coefficient.real(), expected, 1e-8 * expected);
  EXPECT_NEAR(t.eval(0.0).real(), expected, 1e-8 * expected);
}

TEST(TransverseFourier, ParsevalOverModes) {
  // sum_K |(b^2)_K|^2 = int_S b^4 for the node rule at n points, modes of the full grid
  PotentialSpec spec;
  spec.rho = 0.45;
  const auto lat = square();
  const auto pot = build_potential(spec, lat, Grid{20.0, 128, 1, 5});
  const int n = 16;
  double sum = 0.0;
  for (int n2 = -n / 2; n2 < n / 2; ++n2) {
    for (int n3 = -n / 2; n3 < n / 2; ++n3) {
      sum += std::norm(transverse_fourier_sq(pot, {n2, n3, n2 * lat.b2_len, n3 * lat.b3_len}, n).coefficient);
    }
  }
  double direct = 0.0;
  const double h2 = lat.a2_len / n, h3 = lat.a3_len / n;
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) {
      const double b = pot.b(-0.5 * lat.a2_len + (a + 0.5) * h2, -0.5 * lat.a3_len + (c + 0.5) * h3);
      direct += std::pow(b, 4) * h2 * h3;
    }
  }
  const double s4 = std::pow(pot.scale(), 4);
  EXPECT_NEAR(sum, direct * s4, 1e-12 * direct * s4);
}

TEST(Potential, DegenerateAndInvalidInputs) {
  PotentialSpec spec;
  spec.transverse = TransverseKind::Fourier;
  try {
    build_potential(spec, square(), Grid{20.0, 128, 1, 5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
  PotentialSpec bad;
  bad.rho = 0.7;
  EXPECT_THROW(build_potential(bad, square(), Grid{20.0, 128, 1, 5}), Error);
  EXPECT_THROW(build_potential(PotentialSpec{}, square(), Grid{20.0, 15, 1, 5}), Error);
  EXPECT_THROW(build_potential(PotentialSpec{}, square(), Grid{20.0, 128, 2, 4}), Error);
  EXPECT_THROW(build_potential(PotentialSpec{}, square(), Grid{0.0, 128, 1, 5}), Error);
}

TEST(Potential, FourierTransverseProfile) {
  PotentialSpec spec;
  spec.transverse = TransverseKind::Fourier;
  spec.terms = {{0, 0, 2.0, 0.0}, {1, 0, 0.5, 0.0}, {0, 1, 0.0, 0.5}};
  const auto lat = square();
  const auto pot = build_potential(spec, lat, Grid{20.0, 128, 1, 5});
  EXPECT_NEAR(pot.b(0.0, 0.0), 2.5, 1e-14);
  EXPECT_NEAR(pot.b(0.0, 0.5 * kPi), 2.0 + 0.5 - 0.5, 1e-14);
  EXPECT_NEAR(pot.b(0.5 * kPi, 0.0), 2.0 + 0.5 * std::cos(0.5 * kPi), 1e-14);
  EXPECT_NEAR(pot.quadrature_norm(), 1.0, 1e-12);
}

TEST(Potential, BoxLengthCoversDecayTolerance) {
  PotentialSpec spec;
  const double L = default_box_half_length(spec, 1e-8);
  EXPECT_LE(longitudinal_profile(spec, L), 1e-8);
  EXPECT_EQ(std::fmod(L, 2.0), 0.0);
}

}  // namespace
}  // namespace bsop
