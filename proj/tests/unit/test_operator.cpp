#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "bsop/errors.hpp"
#include "fixtures.hpp"

namespace bsop {
namespace {

using test::kE;
using test::polar;
using test::small_model;
using test::small_regime;

double r_mid() { return 0.5 * (small_regime().annulus.inner_radius + small_regime().annulus.outer_radius); }

const std::shared_ptr<const Model>& tiny_model() {
  static const auto m = test::make_model(Grid{20.0, 64, 1, 3});
  return m;
}

TEST(Operator, DualPathAgreesOnSmoothStates) {
  const auto& model = small_model();
  const auto k = polar(r_mid(), 0.3);
  const auto G = assemble_gamma(model, k, kE, 0.0);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 6; ++i) {
    const auto v = test::random_state(*model, rng);
    const double err = (G.apply(v) - apply_gamma_spectral(*model, v, k, kE)).norm() / v.norm();
    EXPECT_LE(err, 1e-6) << i;
  }
}

TEST(Operator, DualPathAwayFromTheShell) {
  const auto& model = small_model();
  const QuasiMomentum k{0.45, 0.1};
  std::mt19937_64 rng(12);
  for (double eps : {0.0, 0.05}) {
    const auto G = assemble_gamma(model, k, kE, eps);
    const auto v = test::random_state(*model, rng);
    const double err = (G.apply(v) - apply_gamma_spectral(*model, v, k, {kE, eps})).norm() / v.norm();
    EXPECT_LE(err, 1e-6) << eps;
  }
}

TEST(Operator, HermitianOnRealAxisOutsideShell) {
  const auto& model = tiny_model();
  const auto G = assemble_gamma(model, {0.4, 0.1}, kE, 0.0);
  EXPECT_TRUE(G.hermitian);
  const Eigen::MatrixXcd A = G.to_dense();
  EXPECT_LE((A - A.adjoint()).norm(), 1e-13 * A.norm());
  EXPECT_FALSE(assemble_gamma(model, {0.1, 0.1}, kE, 0.0).hermitian);
  EXPECT_FALSE(assemble_gamma(model, {0.4, 0.1}, kE, 0.01).hermitian);
}

TEST(Operator, AdjointFlipsImaginaryPart) {
  const auto& model = tiny_model();
  for (const QuasiMomentum k : {QuasiMomentum{0.4, 0.1}, QuasiMomentum{0.1, 0.2}}) {
    for (double eps : {0.01, 0.1}) {
      const auto Gp = assemble_gamma(model, k, kE, eps);
      const auto Gm = assemble_gamma(model, k, kE, -eps);
      EXPECT_LE((Gp.adjoint() - Gm).frobenius(), 1e-12 * Gp.frobenius());
      std::mt19937_64 rng(4);
      const auto u = test::random_state(*model, rng);
      const auto v = test::random_state(*model, rng);
      const cplx a = u.dot(Gp.apply(v));
      const cplx b = Gp.apply_adjoint(u).dot(v);
      EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
    }
  }
}

TEST(Operator, DenseMatchesApply) {
  const auto& model = tiny_model();
  const auto G = assemble_gamma(model, {0.2, 0.1}, kE, 0.02);
  std::mt19937_64 rng(8);
  const auto v = test::random_state(*model, rng);
  EXPECT_LE((G.to_dense() * v - G.apply(v)).norm(), 1e-12 * G.apply(v).norm());
  EXPECT_NEAR(G.frobenius(), G.to_dense().norm(), 1e-10 * G.frobenius());
  try {
    G.to_dense(10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MemoryGuard);
  }
}

TEST(Decomposition, RankOneProjectorAndCoefficient) {
  const auto& model = small_model();
  const auto k = polar(r_mid(), 1.1);
  const auto d = assemble_decomposition(model, k, kE, 0.0);
  const double pI = std::sqrt(k.norm_sq() - kE);
  EXPECT_NEAR(d.Lambda.real(), model->lattice().green_coeff / pI, 1e-12 * std::abs(d.Lambda));
  EXPECT_NEAR(d.Lambda.imag(), 0.0, 1e-15);
  EXPECT_NEAR(hs_norm(d.Lambda * d.P), std::abs(d.Lambda), 1e-10 * std::abs(d.Lambda));

  std::mt19937_64 rng(2);
  const auto& phi = model->phi();
  EXPECT_NEAR(phi.norm(), 1.0, 1e-12);
  for (int i = 0; i < 3; ++i) {
    const auto v = test::random_state(*model, rng);
    const auto Pv = d.P.apply(v);
    EXPECT_LE((d.P.apply(Pv) - Pv).norm(), 1e-12 * v.norm());
    EXPECT_LE((Pv - phi.dot(v) * phi).norm(), 1e-12 * v.norm());
  }
  const auto G = assemble_gamma(model, k, kE, 0.0);
  EXPECT_LE((G - (d.Lambda * d.P + d.C)).frobenius(), 1e-12 * G.frobenius());
}

TEST(Decomposition, ComplexEnergy) {
  const auto& model = tiny_model();
  const QuasiMomentum k{0.2, 0.1};
  const auto d = assemble_decomposition(model, k, kE, 0.03);
  const auto G = assemble_gamma(model, k, kE, 0.03);
  EXPECT_LE((G - (d.Lambda * d.P + d.C)).frobenius(), 1e-12 * G.frobenius());
  const cplx p = dispersion_root(k.norm_sq(), kE, 0.03).value();
  EXPECT_LE(std::abs(d.Lambda - cplx(0, 1) * model->lattice().green_coeff / p), 1e-14);
}

TEST(Kernel, RealAndSymmetricOffShell) {
  const auto& pot = small_model()->potential();
  const QuasiMomentum k{0.4, 0.1};
  const std::array<double, 3> x{0.3, 0.2, -0.4}, y{-1.1, 0.5, 0.1};
  const cplx kxx = gamma_kernel(pot, x, {0.3 + 0.5, 0.2, -0.4}, k, kE, 0.0, 4);
  EXPECT_LE(std::abs(kxx.imag()), 1e-12 * std::abs(kxx));
  const cplx a = gamma_kernel(pot, x, y, k, kE, 0.0, 6);
  const cplx b = gamma_kernel(pot, y, x, k, kE, 0.0, 6);
  EXPECT_LE(std::abs(a - std::conj(b)), 1e-14 * std::abs(a));
  const cplx c = gamma_kernel(pot, x, y, k, kE, 0.05, 6);
  const cplx d = gamma_kernel(pot, y, x, k, kE, -0.05, 6);
  EXPECT_LE(std::abs(c - std::conj(d)), 1e-14 * std::abs(c));
}

TEST(Kernel, ConvergesInModeCutoff) {
  const auto& pot = small_model()->potential();
  const QuasiMomentum k{0.4, 0.1};
  const std::array<double, 3> x{0.5, 0.2, -0.4}, y{-0.5, 0.5, 0.1};
  const cplx k8 = gamma_kernel(pot, x, y, k, kE, 0.0, 8);
  const cplx k12 = gamma_kernel(pot, x, y, k, kE, 0.0, 12);
  const cplx k2 = gamma_kernel(pot, x, y, k, kE, 0.0, 2);
  EXPECT_LE(std::abs(k12 - k8), 1e-3 * std::abs(k12));
  EXPECT_LE(std::abs(k12 - k8), std::abs(k12 - k2));
}

TEST(Oscillatory, DomainAndSymmetry) {
  const auto& model = tiny_model();
  try {
    assemble_C0(model, {0.4, 0.0}, kE);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
  const auto C0 = assemble_C0(model, {0.1, 0.1}, kE);
  const Eigen::MatrixXcd A = C0.to_dense();
  EXPECT_GT((A - A.adjoint()).norm(), 0.1 * A.norm());
  EXPECT_LE((A - A.transpose()).norm(), 1e-12 * A.norm());
}

TEST(Operator, PositiveBelowSpectrum) {
  const auto& model = tiny_model();
  const auto G = assemble_gamma(model, {0.2, 0.1}, -1.0, 0.0);
  ASSERT_TRUE(G.hermitian);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G.to_dense());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
}

TEST(Operator, EigenvaluesBoundedByFrobenius) {
  const auto& model = tiny_model();
  const auto G = assemble_gamma(model, {0.1, 0.2}, kE, 0.0);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(G.to_dense(), false).eigenvalues();
  const double f = G.frobenius();
  EXPECT_LE(ev.cwiseAbs().maxCoeff(), f * (1 + 1e-12));
  EXPECT_LE(ev.cwiseAbs2().sum(), f * f * (1 + 1e-10));
}

TEST(Operator, RemainderBelowAnalyticBound) {
  const auto& model = small_model();
  const double cb = bound_c(model->potential(), 1.0);
  for (double th : {0.0, 0.7, 2.0}) {
    const auto d = assemble_decomposition(model, polar(r_mid(), th), kE, 0.0);
    EXPECT_LE(d.C.frobenius(), cb) << th;
  }
  EXPECT_LE(small_regime().c_bound, cb);
}

TEST(Operator, LinearRateAwayFromShell) {
  const auto lr = limit_rates(small_model(), {0.45, 0.0}, kE, {1e-3, 1e-4, 1e-5});
  EXPECT_EQ(lr.region, Region::BEPlus);
  EXPECT_NEAR(lr.slope_plus, 1.0, 0.05);
  EXPECT_NEAR(lr.slope_minus, 1.0, 0.05);
  EXPECT_TRUE(lr.c_plus.empty());
}

TEST(Operator, OpenChannelRates) {
  const auto lr = limit_rates(tiny_model(), {0.1, 0.1}, kE, {1e-2, 1e-3, 1e-4});
  EXPECT_EQ(lr.region, Region::BEMinus);
  ASSERT_EQ(lr.adjoint_defect.size(), 3u);
  EXPECT_LT(lr.plus.back(), lr.plus.front());
  EXPECT_LT(lr.adjoint_defect.back(), lr.adjoint_defect.front());
  EXPECT_THROW(limit_rates(tiny_model(), {0.1, 0.1}, kE, {1e-3, 1e-2}), Error);
  EXPECT_THROW(limit_rates(tiny_model(), {0.1, 0.1}, kE, {}), Error);
}

TEST(Operator, RemainderStableUnderRefinement) {
  const auto coarse = test::make_model(Grid{20.0, 128, 1, 5});
  const auto fine = test::make_model(Grid{20.0, 256, 1, 5});
  const QuasiMomentum k{0.4, 0.1};
  const double a = assemble_decomposition(coarse, k, kE, 0.0).C.frobenius();
  const double b = assemble_decomposition(fine, k, kE, 0.0).C.frobenius();
  EXPECT_NEAR(a, b, 1e-3 * b);
}

TEST(Operator, ArithmeticRequiresSameModel) {
  const auto a = assemble_gamma(tiny_model(), {0.4, 0.1}, kE, 0.0);
  const auto b = assemble_gamma(small_model(), {0.4, 0.1}, kE, 0.0);
  EXPECT_THROW(a - b, Error);
  EXPECT_LE((a - a).frobenius(), 0.0);
}

TEST(Operator, MemoryGuard) {
  const auto lat = make_lattice(test::kTwoPi, test::kTwoPi);
  const auto pot = build_potential(PotentialSpec{}, lat, Grid{20.0, 128, 1, 5});
  try {
    Model m(pot, 1024);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MemoryGuard);
  }
}

}  // namespace
}  // namespace bsop
