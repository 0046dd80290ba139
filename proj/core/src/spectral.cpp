#include "bsop/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsop/errors.hpp"

namespace bsop {

namespace {

void fix_phase(Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi) {
  const cplx c = phi.dot(psi);  // conj(phi)^T psi
  if (std::abs(c) > 1e-300) psi *= std::conj(c) / std::abs(c);
}

}  // namespace

Eigen::VectorXcd dense_eigenvalues(const DiscretizedOp& op, int max_dim) {
  const Eigen::MatrixXcd A = op.to_dense(max_dim);
  Eigen::VectorXcd ev;
  if (op.hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Hermitian eigensolver failed");
    ev = es.eigenvalues().cast<cplx>();
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "complex eigensolver failed");
    ev = es.eigenvalues();
  }
  std::vector<cplx> v(ev.data(), ev.data() + ev.size());
  std::stable_sort(v.begin(), v.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

EigenPair leading_eig(const DiscretizedOp& op, const EigOptions& opts) {
  const int n = op.dim();
  EigenPair out;
  if (n <= opts.dense_limit) {
    const Eigen::MatrixXcd A = op.to_dense(opts.dense_limit);
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Eigen::VectorXcd ev;
    Eigen::MatrixXcd vecs;
    if (op.hermitian) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
      if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Hermitian eigensolver failed");
      ev = es.eigenvalues().cast<cplx>();
      vecs = es.eigenvectors();
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
      if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "complex eigensolver failed");
      ev = es.eigenvalues();
      vecs = es.eigenvectors();
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(ev[a]) > std::abs(ev[b]); });
    out.lambda1 = ev[idx[0]];
    out.lambda2 = n > 1 ? ev[idx[1]] : cplx(0.0);
    out.psi1 = vecs.col(idx[0]);
    out.dense = true;
  } else {
    KrylovOptions ko = opts.krylov;
    ko.nev = std::max(ko.nev, opts.second ? 2 : 1);
    const auto res = krylov_eigs([&op](const Eigen::VectorXcd& v) { return op.apply(v); }, n,
                                 op.hermitian, Which::LargestMagnitude, ko);
    if (!res.converged) {
      throw Error(ErrorKind::Numerical, "Krylov iteration did not converge; residual " +
                                            std::to_string(res.residuals[0]));
    }
    out.lambda1 = res.values[0];
    out.lambda2 = opts.second ? res.values[1] : cplx(std::nan(""), 0.0);
    out.psi1 = res.vectors.col(0);
    out.matvecs = res.matvecs;
  }
  if (op.hermitian) {
    out.lambda1 = out.lambda1.real();
    out.lambda2 = out.lambda2.real();
  }
  out.psi1 /= out.psi1.norm();
  fix_phase(out.psi1, op.model->phi());
  out.gap = std::abs(out.lambda1) - std::abs(out.lambda2);
  out.residual = (op.apply(out.psi1) - out.lambda1 * out.psi1).norm();
  return out;
}

SeparationReport separation_check(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                  double eps, const Annulus& ann, double c_bound,
                                  const EigOptions& opts) {
  if (!(ann.g > 0.0 && ann.g < 1.0 / (ann.s * c_bound))) {
    throw Error(ErrorKind::RegimeViolation, "coupling outside (0, 1/(s c))");
  }
  if (!ann.contains_closed(k)) throw Error(ErrorKind::Domain, "k outside the closed annulus");
  SeparationReport r;
  const auto d = assemble_decomposition(model, k, ann.E, eps);
  r.Lambda = d.Lambda;
  r.c_measured = d.C.frobenius();
  const auto G = assemble_gamma(model, k, ann.E, eps);
  EigOptions o = opts;
  o.second = true;
  const auto ep = leading_eig(G, o);
  r.lambda1 = ep.lambda1;
  r.lambda2 = ep.lambda2;
  const double c = r.c_measured;
  r.disks_disjoint = std::abs(r.Lambda) > 2.0 * c;
  r.lambda_exceeds_4c = std::abs(r.Lambda) > 4.0 * c;
  r.lambda1_in_disk = std::abs(ep.lambda1 - r.Lambda) <= c;
  r.lambda1_simple = ep.gap > kDegenerateGap && std::abs(ep.lambda1 - ep.lambda2) > kDegenerateGap;
  r.others_in_small_disk = std::abs(ep.lambda2) <= c;
  return r;
}

SingularPair min_singular_pair(const DiscretizedOp& op, double g, const EigOptions& opts) {
  const int n = op.dim();
  if (n <= opts.svd_dense_limit) {
    Eigen::MatrixXcd A = -g * op.to_dense(opts.svd_dense_limit);
    A.diagonal().array() += 1.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
    const Eigen::Index last = svd.singularValues().size() - 1;
    return {svd.singularValues()[last], svd.matrixV().col(last)};
  }
  auto normal = [&op, g](const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd a = v - g * op.apply(v);
    return Eigen::VectorXcd(a - g * op.apply_adjoint(a));
  };
  KrylovOptions ko = opts.krylov;
  ko.nev = 1;
  ko.start = Eigen::VectorXcd();
  const auto res = krylov_eigs(normal, n, true, Which::SmallestAlgebraic, ko);
  if (!res.converged) throw Error(ErrorKind::Numerical, "singular value iteration did not converge");
  return {std::sqrt(std::max(res.values[0].real(), 0.0)), res.vectors.col(0)};
}

double min_singular_value(const DiscretizedOp& op, double g, const EigOptions& opts) {
  return min_singular_pair(op, g, opts).value;
}

InverseBound outside_annulus_bound(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                   double eps, const Annulus& ann, const EigOptions& opts) {
  if (ann.contains(k)) throw Error(ErrorKind::Domain, "k inside the annulus");
  InverseBound r;
  r.bound = 2.0 * ann.s * (ann.s - 1.0);
  const auto G = assemble_gamma(model, k, ann.E, eps);
  const double smin = min_singular_value(G, ann.g, opts);
  r.invertible = smin > 1e-12;
  r.inv_norm = r.invertible ? 1.0 / smin : std::numeric_limits<double>::infinity();
  return r;
}

FHGradient fh_gradient(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                       const EigOptions& opts) {
  if (classify(k, E) != Region::BEPlus) throw Error(ErrorKind::Domain, "gradient needs |k|^2 > E");
  const auto G = assemble_gamma(model, k, E, 0.0);
  EigOptions o = opts;
  o.second = true;
  const auto ep = leading_eig(G, o);
  if (ep.gap < kDegenerateGap) throw Error(ErrorKind::IllConditioned, "leading eigenvalue not simple");
  FHGradient out;
  out.lambda1 = ep.lambda1.real();
  out.gap = ep.gap;
  out.psi1 = ep.psi1;
  for (int j = 0; j < 2; ++j) {
    const auto dG = assemble_gamma_dk(model, k, E, j);
    out.grad[j] = ep.psi1.dot(dG.apply(ep.psi1)).real();
  }
  return out;
}

double overlap_lower_bound(double s) { return std::sqrt(1.0 - 4.0 * (s - 1.0) / (s * (s - 2.0))); }

OverlapReport overlap_bound(const Eigen::VectorXcd& psi1, const Model& model, double s) {
  OverlapReport r;
  r.overlap = std::abs(model.phi().dot(psi1)) / psi1.norm();
  r.bound = overlap_lower_bound(s);
  return r;
}

}  // namespace bsop
