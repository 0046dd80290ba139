#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace bsop {

using cplx = std::complex<double>;

// Trapezoid rule for int g(|x_i - y|) f(y) dy with g(r) = i exp(i p r) / (2p),
// corrected at the kink y = x_i by Euler-Maclaurin end terms:
//   integral ~ h sum_j g(|x_i - x_j|) f_j + sum_{j even} c_j(p) f^{(j)}(x_i).
// c_j(p) is a power series in p (regular at p = 0) convergent for |p| h < 2 pi.
struct KinkCoefficients {
  std::array<cplx, 4> c{};   // derivative orders 0, 2, 4, 6
  std::array<cplx, 4> dc{};  // d c_j / dp
};

KinkCoefficients kink_coefficients(cplx p, double h);

// Channel Green function of -d^2/dx^2 - p^2 (outgoing branch) and its p-derivative.
cplx channel_green(cplx p, double r);
cplx channel_green_dp(cplx p, double r);
// channel_green minus its r = 0 value i/(2p), free of cancellation for small p r.
cplx channel_green_regular(cplx p, double r);

// exp(z) - 1 without cancellation near z = 0.
cplx expm1c(cplx z);

enum class KinkPart { Full, Derivative };

// Dense N x N corrected matrix on the uniform periodic node set x_i = x0 + i h.
// Derivative returns d/dp of the same matrix. subtract_constant removes the
// constant kernel h i/(2p) from every entry (rank-one part of the zero channel).
Eigen::MatrixXcd kink_matrix(cplx p, double h, int n, KinkPart part = KinkPart::Full,
                             bool subtract_constant = false);

// Stencil weights (offsets -3..3) of the periodic difference operators used for
// orders 2, 4 and 6, already divided by the matching power of h.
std::array<std::array<double, 7>, 3> kink_stencils(double h);

}  // namespace bsop
