#pragma once

#include <array>

#include <Eigen/Dense>

#include "bsop/annulus.hpp"
#include "bsop/krylov.hpp"
#include "bsop/operator.hpp"

namespace bsop {

struct EigOptions {
  int dense_limit = 512;       // dense eigendecomposition at or below this dimension
  int svd_dense_limit = 4000;  // dense SVD at or below this dimension
  bool second = true;      // converge lambda2 as well (needed for the gap)
  KrylovOptions krylov;
};

struct EigenPair {
  cplx lambda1;
  cplx lambda2;
  Eigen::VectorXcd psi1;  // unit norm, <phi_k, psi1> real nonnegative
  double gap = 0.0;       // |lambda1| - |lambda2|; NaN when lambda2 was not requested
  double residual = 0.0;  // ||Gamma psi1 - lambda1 psi1||
  bool dense = false;
  int matvecs = 0;
};

constexpr double kDegenerateGap = 1e-8;

EigenPair leading_eig(const DiscretizedOp& op, const EigOptions& opts = {});

// All eigenvalues by the dense path (small dimensions only).
Eigen::VectorXcd dense_eigenvalues(const DiscretizedOp& op, int max_dim = 4000);

struct SeparationReport {
  cplx Lambda;
  double c_measured = 0.0;
  cplx lambda1;
  cplx lambda2;
  bool disks_disjoint = false;       // |Lambda| > 2c
  bool lambda_exceeds_4c = false;    // |Lambda| > 4c
  bool lambda1_in_disk = false;      // |lambda1 - Lambda| <= c
  bool lambda1_simple = false;       // gap above the degeneracy threshold
  bool others_in_small_disk = false; // |lambda2| <= c
  bool pass() const {
    return disks_disjoint && lambda_exceeds_4c && lambda1_in_disk && lambda1_simple &&
           others_in_small_disk;
  }
};

SeparationReport separation_check(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                  double eps, const Annulus& ann, double c_bound,
                                  const EigOptions& opts = {});

struct SingularPair {
  double value = 0.0;
  Eigen::VectorXcd right;  // unit right singular vector
};

// Smallest singular value of I - g op.
SingularPair min_singular_pair(const DiscretizedOp& op, double g, const EigOptions& opts = {});
double min_singular_value(const DiscretizedOp& op, double g, const EigOptions& opts = {});

struct InverseBound {
  bool invertible = false;
  double inv_norm = 0.0;
  double bound = 0.0;  // 2 s (s - 1)
  bool pass() const { return invertible && inv_norm <= bound; }
};

InverseBound outside_annulus_bound(std::shared_ptr<const Model> model, const QuasiMomentum& k,
                                   double eps, const Annulus& ann, const EigOptions& opts = {});

struct FHGradient {
  std::array<double, 2> grad{};
  double lambda1 = 0.0;
  double gap = 0.0;
  Eigen::VectorXcd psi1;
  double norm() const { return std::hypot(grad[0], grad[1]); }
};

// Derivative of the leading eigenvalue of Gamma_k(E) in k (real symmetric regime).
FHGradient fh_gradient(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                       const EigOptions& opts = {});

struct OverlapReport {
  double overlap = 0.0;
  double bound = 0.0;  // (1 - 4(s-1)/(s(s-2)))^{1/2}
  bool pass() const { return overlap >= bound; }
};

double overlap_lower_bound(double s);
OverlapReport overlap_bound(const Eigen::VectorXcd& psi1, const Model& model, double s);

}  // namespace bsop
