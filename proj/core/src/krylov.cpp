#include "bsop/krylov.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "bsop/errors.hpp"

namespace bsop {

namespace {

using cplx = std::complex<double>;

// Two passes of classical Gram-Schmidt; returns the remaining norm.
double orthogonalize(const Eigen::MatrixXcd& V, int m, Eigen::VectorXcd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (m == 0) break;
    const Eigen::VectorXcd c = V.leftCols(m).adjoint() * w;
    w.noalias() -= V.leftCols(m) * c;
  }
  return w.norm();
}

std::vector<int> order_ritz(const Eigen::VectorXcd& theta, Which which) {
  std::vector<int> idx(static_cast<std::size_t>(theta.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    switch (which) {
      case Which::LargestMagnitude: return std::abs(theta[a]) > std::abs(theta[b]);
      case Which::LargestAlgebraic: return theta[a].real() > theta[b].real();
      case Which::SmallestAlgebraic: return theta[a].real() < theta[b].real();
    }
    return false;
  });
  return idx;
}

}  // namespace

KrylovResult krylov_eigs(const MatVec& op, int n, bool hermitian, Which which,
                         const KrylovOptions& opts) {
  if (n <= 0 || opts.nev < 1 || opts.nev > n) throw Error(ErrorKind::Domain, "bad eigenproblem size");
  const int max_dim = std::min(opts.max_dim, n);
  const int keep = std::min(std::max(opts.nev + 8, max_dim / 3), max_dim - 1);

  Eigen::MatrixXcd V(n, max_dim), AV(n, max_dim);
  Eigen::VectorXcd v0;
  if (opts.start.size() == n && opts.start.norm() > 0.0) {
    v0 = opts.start;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> N(0.0, 1.0);
    v0.resize(n);
    for (int i = 0; i < n; ++i) v0[i] = cplx(N(rng), N(rng));
  }
  V.col(0) = v0 / v0.norm();
  AV.col(0) = op(V.col(0));
  int m = 1;
  KrylovResult res;
  res.matvecs = 1;

  Eigen::VectorXcd theta;
  Eigen::MatrixXcd S;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    bool invariant = false;
    while (m < max_dim) {
      Eigen::VectorXcd f = AV.col(m - 1);
      const double nf = orthogonalize(V, m, f);
      if (nf <= 1e-14 * AV.col(m - 1).norm()) {
        invariant = true;
        break;
      }
      V.col(m) = f / nf;
      AV.col(m) = op(V.col(m));
      ++res.matvecs;
      ++m;
    }

    Eigen::MatrixXcd H = V.leftCols(m).adjoint() * AV.leftCols(m);
    if (hermitian) {
      H = 0.5 * (H + H.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      theta = es.eigenvalues().cast<cplx>();
      S = es.eigenvectors();
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H);
      if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "projected eigensolver failed");
      theta = es.eigenvalues();
      S = es.eigenvectors();
    }
    const auto idx = order_ritz(theta, which);
    double scale = 0.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(theta[i]));
    if (scale == 0.0) scale = 1.0;

    const int nev = std::min(opts.nev, m);
    res.values.resize(nev);
    res.vectors.resize(n, nev);
    res.residuals.resize(nev);
    bool all = true;
    for (int j = 0; j < nev; ++j) {
      Eigen::VectorXcd s = S.col(idx[j]);
      s /= s.norm();
      const Eigen::VectorXcd x = V.leftCols(m) * s;
      const Eigen::VectorXcd r = AV.leftCols(m) * s - theta[idx[j]] * x;
      const double xn = x.norm();
      res.values[j] = theta[idx[j]];
      res.vectors.col(j) = x / xn;
      res.residuals[j] = r.norm() / xn;
      if (res.residuals[j] > opts.tol * scale) all = false;
    }
    if (all || invariant) {
      res.converged = true;
      return res;
    }
    if (restart == opts.max_restarts) break;

    // thick restart: keep the leading Ritz vectors, continue from the next
    // Krylov direction (orthogonal to the old span, hence to the kept one)
    Eigen::VectorXcd f = AV.col(m - 1);
    const double nf = orthogonalize(V, m, f);
    const int kk = std::min(keep, m - 1);
    Eigen::MatrixXcd Sk(m, kk);
    for (int j = 0; j < kk; ++j) Sk.col(j) = S.col(idx[j]);
    if (!hermitian) {
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Sk);
      Sk = qr.householderQ() * Eigen::MatrixXcd::Identity(m, kk);
    }
    const Eigen::MatrixXcd Vn = V.leftCols(m) * Sk;
    const Eigen::MatrixXcd AVn = AV.leftCols(m) * Sk;
    V.leftCols(kk) = Vn;
    AV.leftCols(kk) = AVn;
    m = kk;
    if (nf <= 1e-14 * scale) break;
    V.col(m) = f / nf;
    AV.col(m) = op(V.col(m));
    ++res.matvecs;
    ++m;
  }
  res.converged = false;
  return res;
}

}  // namespace bsop
