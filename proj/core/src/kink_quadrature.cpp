#include "bsop/kink_quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "bsop/errors.hpp"

namespace bsop {

namespace {

constexpr cplx I{0.0, 1.0};

// i^e for integer e >= 0
cplx ipow(int e) {
  switch (e % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

cplx expm1c(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

cplx channel_green(cplx p, double r) { return I * std::exp(I * p * r) / (2.0 * p); }

cplx channel_green_dp(cplx p, double r) {
  return 0.5 * I * std::exp(I * p * r) * (I * p * r - 1.0) / (p * p);
}

cplx channel_green_regular(cplx p, double r) { return I * expm1c(I * p * r) / (2.0 * p); }

KinkCoefficients kink_coefficients(cplx p, double h) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!(std::abs(p) * h < 0.95 * two_pi)) {
    throw Error(ErrorKind::Numerical, "kink correction series diverges: |p| h too large");
  }
  KinkCoefficients out;
  constexpr int max_m = 80;
  for (int jj = 0; jj < 4; ++jj) {
    const int j = 2 * jj;
    const int m0 = j / 2 + 1;
    cplx sum = 0.0, dsum = 0.0;
    for (int m = m0; m <= max_m; ++m) {
      const double beta_m = boost::math::bernoulli_b2n<double>(m) *
                            std::pow(h, 2 * m) / boost::math::factorial<double>(2 * m);
      const int n = 2 * m - 1 - j;
      const double binom = boost::math::binomial_coefficient<double>(2 * m - 1, j);
      const cplx base = beta_m * binom * ipow(n + 1);
      const cplx term = base * std::pow(p, n - 1);
      sum += term;
      if (n > 1) dsum += base * static_cast<double>(n - 1) * std::pow(p, n - 2);
      if (m > m0 + 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    out.c[jj] = sum;
    out.dc[jj] = dsum;
  }
  return out;
}

std::array<std::array<double, 7>, 3> kink_stencils(double h) {
  const double h2 = h * h;
  const double h4 = h2 * h2;
  const double h6 = h4 * h2;
  std::array<std::array<double, 7>, 3> s{};
  s[0] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
  s[1] = {-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6};
  s[2] = {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0};
  for (auto& v : s[0]) v /= h2;
  for (auto& v : s[1]) v /= h4;
  for (auto& v : s[2]) v /= h6;
  return s;
}

Eigen::MatrixXcd kink_matrix(cplx p, double h, int n, KinkPart part, bool subtract_constant) {
  if (p == cplx(0.0)) throw Error(ErrorKind::SingularDispersion, "vanishing channel root");
  std::vector<cplx> t(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const double r = d * h;
    cplx g;
    if (part == KinkPart::Full) {
      g = subtract_constant ? channel_green_regular(p, r) : channel_green(p, r);
    } else if (!subtract_constant) {
      g = channel_green_dp(p, r);
    } else {
      // d/dp [g - i/(2p)] = (i/2) (e^z (z - 1) + 1) / p^2 with z = i p r
      const cplx z = I * p * r;
      cplx num;
      if (std::abs(z) < 1e-3) {
        num = 0.0;
        cplx zn = z * z;
        double fact = 2.0;
        for (int k = 2; k < 8; ++k) {
          num += zn * static_cast<double>(k - 1) / fact;
          zn *= z;
          fact *= k + 1;
        }
      } else {
        num = std::exp(z) * (z - 1.0) + 1.0;
      }
      g = 0.5 * I * num / (p * p);
    }
    t[d] = h * g;
  }
  Eigen::MatrixXcd T(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) T(i, j) = t[std::abs(i - j)];
  }
  const auto kc = kink_coefficients(p, h);
  const auto& c = part == KinkPart::Full ? kc.c : kc.dc;
  const auto st = kink_stencils(h);
  for (int i = 0; i < n; ++i) T(i, i) += c[0];
  for (int order = 0; order < 3; ++order) {
    const cplx coef = c[order + 1];
    for (int i = 0; i < n; ++i) {
      for (int o = -3; o <= 3; ++o) {
        const int j = ((i + o) % n + n) % n;
        T(i, j) += coef * st[order][o + 3];
      }
    }
  }
  return T;
}

}  // namespace bsop
