#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "bsop/errors.hpp"
#include "bsop/lap.hpp"
#include "fixtures.hpp"

namespace bsop {
namespace {

using test::kE;
using test::polar;

const LapGrid& grid() {
  static const LapGrid g(make_lattice(test::kTwoPi, test::kTwoPi), 20.0, 128, 5);
  return g;
}

Channels smooth(std::mt19937_64& rng) {
  std::vector<double> x;
  for (int i = 0; i < grid().n1(); ++i) x.push_back(grid().x(i));
  return {grid().h(), grid().x(0), grid().modes(),
          smooth_random_channels(x, static_cast<int>(grid().modes().size()), rng)};
}

cplx pairing(const Channels& a, const Channels& b) {
  return a.h * (a.values.conjugate().cwiseProduct(b.values)).sum();
}

TEST(Transform, ParsevalAndRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXcd u(grid().n1(), grid().nodes().size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = cplx(N(rng), N(rng));
  for (const QuasiMomentum k : {QuasiMomentum{0.3, 0.1}, QuasiMomentum{-0.2, 0.45}}) {
    EXPECT_LE(parseval_defect(u, grid(), k), 1e-12);
    EXPECT_LE((igft(gft(u, grid(), k), grid(), k) - u).norm(), 1e-12 * u.norm());
    const auto c = transverse_project(u, grid(), k);
    EXPECT_NEAR(c.norm(), real_space_norm(u, grid()), 1e-12 * c.norm());
  }
  EXPECT_THROW(transverse_project(Eigen::MatrixXcd(4, 4), grid(), {0.0, 0.0}), Error);
}

TEST(Transform, SingleBlochWaveConcentratesInOneChannel) {
  const QuasiMomentum k{0.3, -0.1};
  const auto& lat = grid().lattice();
  const int K0 = 7;
  const auto& mode = grid().modes()[K0];
  Eigen::MatrixXcd u(grid().n1(), grid().nodes().size());
  for (int i = 0; i < grid().n1(); ++i) {
    const double x = grid().x(i);
    for (std::size_t l = 0; l < grid().nodes().size(); ++l) {
      const auto& xl = grid().nodes()[l];
      u(i, static_cast<Eigen::Index>(l)) =
          std::exp(-0.5 * x * x) * std::polar(1.0, (k.k2 + mode.K2) * xl[0] + (k.k3 + mode.K3) * xl[1]);
    }
  }
  const auto g = gft(u, grid(), k);
  const double s = std::sqrt(lat.cell_area_S);
  for (Eigen::Index K = 0; K < g.values.cols(); ++K) {
    for (Eigen::Index m = 0; m < g.values.rows(); ++m) {
      const cplx expected = K == K0 ? cplx(s * std::exp(-0.5 * g.xi(m) * g.xi(m))) : cplx(0.0);
      EXPECT_LE(std::abs(g.values(m, K) - expected), 1e-12 * s);
    }
  }
  const auto c = transverse_project(u, grid(), k);
  EXPECT_LE(std::abs(gft_at(c, K0, 0.37) - s * std::exp(-0.5 * 0.37 * 0.37)), 1e-12 * s);
}

TEST(Resolvent, IdentitiesOffTheAxis) {
  std::mt19937_64 rng(2);
  const auto f = smooth(rng);
  const auto v = smooth(rng);
  const QuasiMomentum k{0.2, 0.1};
  for (const cplx z : {cplx(kE, 0.1), cplx(kE, -0.05), cplx(-0.5, 0.0)}) {
    EXPECT_LE(resolvent_identity_defect(f, k, z), 1e-8) << z;
  }
  const cplx z(kE, 0.2);
  const auto a = pairing(v, apply_R0(f, k, {z, Branch::Complex}));
  const auto b = pairing(apply_R0(v, k, {std::conj(z), Branch::Complex}), f);
  EXPECT_LE(std::abs(a - b), 1e-10 * std::abs(a));
  const auto pos = pairing(f, apply_R0(f, k, {cplx(-1.0, 0.0), Branch::Complex}));
  EXPECT_GT(pos.real(), 0.0);
  EXPECT_LE(std::abs(pos.imag()), 1e-12 * pos.real());
}

TEST(Resolvent, BranchDifferenceOnlyInOpenChannel) {
  std::mt19937_64 rng(3);
  const auto f = smooth(rng);
  const auto bd = branch_difference(f, polar(0.5 * std::sqrt(kE), 0.2), kE);
  const int zm = test::zero_mode(grid().modes());
  for (std::size_t K = 0; K < bd.size(); ++K) {
    if (static_cast<int>(K) == zm) {
      EXPECT_GT(bd[K], 1e-3);
    } else {
      EXPECT_EQ(bd[K], 0.0);
    }
  }
}

TEST(Resolvent, ThresholdChannelNeedsVanishingMean) {
  const QuasiMomentum k{std::sqrt(kE), 0.0};
  Channels f{grid().h(), grid().x(0), grid().modes(), Eigen::MatrixXcd::Zero(grid().n1(), 25)};
  const int zm = test::zero_mode(grid().modes());
  for (int i = 0; i < f.n(); ++i) f.values(i, zm) = std::exp(-f.x(i) * f.x(i));
  try {
    apply_R0(f, k, {kE, Branch::Plus});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HypothesisViolation);
  }
  for (int i = 0; i < f.n(); ++i) f.values(i, zm) = f.x(i) * std::exp(-f.x(i) * f.x(i));
  const auto u = apply_R0(f, k, {kE, Branch::Plus});
  EXPECT_TRUE(std::isfinite(u.norm()));
  EXPECT_GT(u.norm(), 0.0);
}

TEST(Resolvent, BoundaryValueNeedsRealEnergy) {
  std::mt19937_64 rng(4);
  const auto f = smooth(rng);
  EXPECT_THROW(apply_R0(f, {0.1, 0.0}, {cplx(kE, 0.1), Branch::Plus}), Error);
  EXPECT_THROW(apply_R0(f, {0.1, 0.0}, {cplx(kE, 0.0), Branch::Plus}, 4), Error);
  EXPECT_THROW(apply_R0(f, {0.1, 0.0}, {cplx(kE, 0.1), Branch::Complex}, -1), Error);
}

TEST(LimitingAbsorption, WeightedConvergenceInOpenRegion) {
  std::mt19937_64 rng(5);
  const auto f = smooth(rng);
  const auto km = polar(0.5 * std::sqrt(kE), 0.2);
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    const auto lc = lap_convergence(f, km, kE, {1e-1, 1e-2, 1e-3, 1e-4}, 2.0, b);
    EXPECT_EQ(lc.region, Region::BEMinus);
    for (std::size_t i = 1; i < lc.diff.size(); ++i) EXPECT_LT(lc.diff[i], lc.diff[i - 1]);
    EXPECT_GT(lc.rate, 0.5);
  }
  const auto lp = lap_convergence(f, {0.45, 0.0}, kE, {1e-2, 1e-3, 1e-4}, 1.0);
  EXPECT_EQ(lp.region, Region::BEPlus);
  EXPECT_NEAR(lp.rate, 1.0, 0.05);
}

TEST(LimitingAbsorption, WeightDomain) {
  std::mt19937_64 rng(6);
  const auto f = smooth(rng);
  EXPECT_THROW(lap_convergence(f, {0.1, 0.0}, kE, {1e-2}, 0.5), Error);
  EXPECT_THROW(lap_convergence(f, {std::sqrt(kE), 0.0}, kE, {1e-2}, 1.0), Error);
  EXPECT_THROW(lap_convergence(f, {0.1, 0.0}, kE, {1e-2}, 2.0, Branch::Complex), Error);
}

TEST(LimitingAbsorption, PairingsVanish) {
  std::mt19937_64 rng(7);
  const auto f = smooth(rng);
  const auto v = smooth(rng);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  for (Branch b : {Branch::Plus, Branch::Minus}) {
    const auto pr = eps_pairings(f, v, polar(0.5 * std::sqrt(kE), 0.2), kE, eps, b);
    for (std::size_t i = 0; i < pr.size(); ++i) EXPECT_LE(pr[i], f.norm() * v.norm());
    EXPECT_LT(pr.back(), pr.front());
  }
}

double holder_oracle(double sigma, double alpha) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  const double integral = integrator.integrate([&](double x) { return std::pow(1.0 + x * x, alpha - sigma); });
  return std::pow(2.0, 1.0 - alpha) / std::sqrt(2.0 * std::numbers::pi) * std::sqrt(integral);
}

TEST(Holder, ConstantMatchesQuadrature) {
  EXPECT_NEAR(holder_constant(2.0, 1.0), 1.0 / std::sqrt(2.0), 1e-14);
  for (auto [sigma, alpha] : {std::pair{2.0, 1.0}, std::pair{1.5, 0.5}, std::pair{3.0, 0.0}, std::pair{1.2, 0.3}}) {
    EXPECT_NEAR(holder_constant(sigma, alpha), holder_oracle(sigma, alpha), 1e-10) << sigma << " " << alpha;
  }
  EXPECT_THROW(holder_constant(1.0, 0.6), Error);
  EXPECT_THROW(holder_constant(3.0, 1.5), Error);
}

TEST(Holder, EstimateHoldsOnRandomStates) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 64; ++i) pairs.push_back({U(rng), U(rng)});
  const int zm = test::zero_mode(grid().modes());
  for (int t = 0; t < 3; ++t) {
    const auto f = smooth(rng);
    EXPECT_TRUE(holder_estimate(f, 2.0, 1.0, zm, pairs).pass());
    EXPECT_TRUE(holder_estimate(f, 2.0, 0.0, zm, pairs).pass());
    EXPECT_TRUE(holder_estimate(f, 1.2, 0.5, 3, pairs).pass());
  }
  EXPECT_THROW(holder_estimate(smooth(rng), 2.0, 1.0, 99, pairs), Error);
}

TEST(NormEquivalence, RatiosBoundedAndOrdered) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<Channels> batch;
  for (int i = 0; i < 4; ++i) {
    Channels f{grid().h(), grid().x(0), grid().modes(), Eigen::MatrixXcd(grid().n1(), 25)};
    for (Eigen::Index j = 0; j < f.values.size(); ++j) f.values(j) = cplx(N(rng), N(rng));
    batch.push_back(f);
  }
  const QuasiMomentum k{0.45, 0.0};
  double lo = INFINITY, hi = 0.0;
  for (double im : {-1.0, 0.0, 1.0}) {
    const auto ne = weighted_norm_equiv(batch, k, kE, cplx(0.0, im), 2.0);
    EXPECT_GT(ne.lower_ratio, 0.0);
    EXPECT_LE(ne.lower_ratio, ne.upper_ratio);
    lo = std::min(lo, ne.lower_ratio);
    hi = std::max(hi, ne.upper_ratio);
  }
  EXPECT_LT(hi / lo, 2.0);
  EXPECT_THROW(weighted_norm_equiv(batch, {0.1, 0.0}, kE, cplx(0.0, 0.0), 2.0), Error);
  EXPECT_THROW(weighted_norm_equiv(batch, k, kE, cplx(0.0, 2.0), 2.0), Error);
  EXPECT_THROW(weighted_norm_equiv(batch, k, kE, cplx(0.5, 0.0), 2.0), Error);
  EXPECT_THROW(weighted_norm_equiv({}, k, kE, cplx(0.0, 0.0), 2.0), Error);
}

TEST(Channels, WeightedNorms) {
  std::mt19937_64 rng(10);
  const auto f = smooth(rng);
  EXPECT_NEAR(f.weighted_norm(0.0), f.norm(), 1e-12 * f.norm());
  EXPECT_LT(f.weighted_norm(-1.0), f.norm());
  EXPECT_GT(f.weighted_norm(1.0), f.norm());
}

TEST(LapGrid, ValidatesShape) {
  const auto lat = make_lattice(test::kTwoPi, test::kTwoPi);
  EXPECT_THROW(LapGrid(lat, 20.0, 127, 5), Error);
  EXPECT_THROW(LapGrid(lat, 20.0, 128, 4), Error);
  EXPECT_THROW(LapGrid(lat, -1.0, 128, 5), Error);
  EXPECT_EQ(LapGrid(lat, 20.0, 128, 5).modes().size(), 25u);
}

}  // namespace
}  // namespace bsop
