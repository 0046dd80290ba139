#include <gtest/gtest.h>

#include <cmath>

#include "bsop/errors.hpp"
#include "bsop/spectral.hpp"
#include "fixtures.hpp"

namespace bsop {
namespace {

using test::kE;
using test::kS;
using test::polar;
using test::small_model;
using test::small_regime;

double r_mid() { return 0.5 * (small_regime().annulus.inner_radius + small_regime().annulus.outer_radius); }

const std::shared_ptr<const Model>& tiny_model() {
  static const auto m = test::make_model(Grid{20.0, 64, 1, 3});
  return m;
}

EigOptions dense_opts() {
  EigOptions o;
  o.dense_limit = 4000;
  return o;
}

EigOptions krylov_opts() {
  EigOptions o;
  o.dense_limit = 0;
  o.svd_dense_limit = 0;
  return o;
}

TEST(Spectral, RankOnePartHasEigenvalueLambda) {
  const auto& model = tiny_model();
  const auto d = assemble_decomposition(model, {0.4, 0.1}, kE, 0.0);
  const auto ep = leading_eig(d.Lambda * d.P, dense_opts());
  EXPECT_NEAR(std::abs(ep.lambda1 - d.Lambda), 0.0, 1e-12 * std::abs(d.Lambda));
  EXPECT_NEAR(std::abs(ep.lambda2), 0.0, 1e-12 * std::abs(d.Lambda));
  EXPECT_NEAR(std::abs(model->phi().dot(ep.psi1)), 1.0, 1e-12);
}

TEST(Spectral, DenseAndKrylovAgree) {
  const auto& model = tiny_model();
  for (const QuasiMomentum k : {QuasiMomentum{0.4, 0.1}, QuasiMomentum{0.2, 0.1}}) {
    const auto G = assemble_gamma(model, k, kE, k.norm_sq() > kE ? 0.0 : 0.01);
    const auto a = leading_eig(G, dense_opts());
    const auto b = leading_eig(G, krylov_opts());
    EXPECT_TRUE(a.dense);
    EXPECT_FALSE(b.dense);
    EXPECT_LE(std::abs(a.lambda1 - b.lambda1), 1e-10 * std::abs(a.lambda1));
    EXPECT_LE(std::abs(a.lambda2 - b.lambda2), 1e-8 * std::abs(a.lambda1));
    EXPECT_NEAR(std::abs(a.psi1.dot(b.psi1)), 1.0, 1e-8);
    EXPECT_LE(b.residual, 1e-9 * std::abs(b.lambda1));
  }
}

TEST(Spectral, AllEigenvaluesSortedAndRealWhenHermitian) {
  const auto G = assemble_gamma(tiny_model(), {0.4, 0.1}, kE, 0.0);
  const auto ev = dense_eigenvalues(G);
  EXPECT_EQ(ev.size(), G.dim());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    EXPECT_EQ(ev[i].imag(), 0.0);
    if (i > 0) EXPECT_LE(std::abs(ev[i]), std::abs(ev[i - 1]));
  }
}

TEST(Spectral, LeadingPairResidualAndPhase) {
  const auto& model = small_model();
  const auto ep = leading_eig(assemble_gamma(model, polar(r_mid(), 0.4), kE, 0.0));
  EXPECT_EQ(ep.lambda1.imag(), 0.0);
  EXPECT_LE(ep.residual, 1e-9 * std::abs(ep.lambda1));
  const cplx c = model->phi().dot(ep.psi1);
  EXPECT_GE(c.real(), 0.0);
  EXPECT_NEAR(c.imag(), 0.0, 1e-12);
  EXPECT_GT(ep.gap, 0.0);
}

TEST(Separation, LeadingEigenvalueIsolatedInsideAnnulus) {
  const auto& reg = small_regime();
  for (double th : {0.1, 1.7, 3.3, 5.0}) {
    const auto sep = separation_check(small_model(), polar(r_mid(), th), 0.0, reg.annulus, reg.c_bound);
    EXPECT_TRUE(sep.pass()) << th;
    EXPECT_LE(std::abs(sep.lambda1 - sep.Lambda), sep.c_measured);
    EXPECT_LE(sep.c_measured, reg.c_bound);
  }
}

TEST(Separation, RejectsCouplingAboveRegimeAndPointsOutside) {
  const auto& reg = small_regime();
  Annulus strong = reg.annulus;
  strong.g = 1.0 / (kS * reg.c_bound) * 1.01;
  try {
    separation_check(small_model(), polar(r_mid(), 0.0), 0.0, strong, reg.c_bound);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RegimeViolation);
  }
  try {
    separation_check(small_model(), polar(2.0 * reg.annulus.outer_radius, 0.0), 0.0, reg.annulus, reg.c_bound);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(OutsideBound, InverseNormBoundedOffTheAnnulus) {
  const auto& ann = small_regime().annulus;
  const double pp = 2.0 * ann.q_plus * ann.g;
  const double pm = 2.0 * ann.q_minus * ann.g;
  for (double th : {0.2, 2.4}) {
    for (double r : {std::sqrt(kE + pp * pp), std::sqrt(kE - pm * pm), 0.5}) {
      const auto ib = outside_annulus_bound(small_model(), polar(r, th), 0.0, ann);
      EXPECT_TRUE(ib.pass()) << r << " " << ib.inv_norm;
      EXPECT_EQ(ib.bound, 2.0 * kS * (kS - 1.0));
    }
  }
  EXPECT_THROW(outside_annulus_bound(small_model(), polar(r_mid(), 0.0), 0.0, ann), Error);
}

TEST(Overlap, LowerBoundValue) {
  EXPECT_NEAR(overlap_lower_bound(6.0), std::sqrt(1.0 / 6.0), 1e-15);
  EXPECT_NEAR(overlap_lower_bound(6.0), 0.40824829046386296, 1e-15);
  EXPECT_GT(overlap_lower_bound(10.0), overlap_lower_bound(6.0));
}

TEST(Overlap, LeadingVectorAlignsWithPotential) {
  const auto fh = fh_gradient(small_model(), polar(r_mid(), 0.9), kE);
  const auto ov = overlap_bound(fh.psi1, *small_model(), kS);
  EXPECT_TRUE(ov.pass());
  EXPECT_GT(ov.overlap, 0.99);
}

TEST(Gradient, FeynmanHellmannMatchesDifferences) {
  const auto& model = small_model();
  const double step = 1e-3 * (r_mid() - std::sqrt(kE));
  EigOptions o;
  o.second = false;
  auto lam = [&](QuasiMomentum k) { return leading_eig(assemble_gamma(model, k, kE, 0.0), o).lambda1.real(); };
  for (double th : {0.3, 2.0}) {
    const auto k = polar(r_mid(), th);
    const auto fh = fh_gradient(model, k, kE);
    const double d2 = (lam({k.k2 + step, k.k3}) - lam({k.k2 - step, k.k3})) / (2 * step);
    const double d3 = (lam({k.k2, k.k3 + step}) - lam({k.k2, k.k3 - step})) / (2 * step);
    EXPECT_LE(std::hypot(fh.grad[0] - d2, fh.grad[1] - d3), 1e-4 * fh.norm()) << th;
  }
}

TEST(Gradient, PointsInwardOnAxis) {
  const auto fh = fh_gradient(small_model(), {r_mid(), 0.0}, kE);
  EXPECT_LT(fh.grad[0], 0.0);
  EXPECT_LE(std::abs(fh.grad[1]), 1e-8 * fh.norm());
  // leading term d(gc / p_I)/d|k| = -gc |k| / p_I^3
  const double pI = std::sqrt(r_mid() * r_mid() - kE);
  const double lead = -small_model()->lattice().green_coeff * r_mid() / (pI * pI * pI);
  EXPECT_NEAR(fh.grad[0] / lead, 1.0, 0.1);
  EXPECT_THROW(fh_gradient(small_model(), {0.1, 0.0}, kE), Error);
}

TEST(Singular, DenseAndKrylovAgree) {
  const auto G = assemble_gamma(tiny_model(), {0.5, 0.2}, kE, 0.01);
  const double g = small_regime().g;
  const auto a = min_singular_pair(G, g, dense_opts());
  const auto b = min_singular_pair(G, g, krylov_opts());
  EXPECT_NEAR(a.value, b.value, 1e-8 * a.value);
  EXPECT_NEAR(std::abs(a.right.dot(b.right)), 1.0, 1e-6);
  const Eigen::VectorXcd r = a.right - g * G.apply(a.right);
  EXPECT_NEAR(r.norm(), a.value, 1e-10);
}

}  // namespace
}  // namespace bsop
