#pragma once

#include <functional>

#include <Eigen/Dense>

namespace bsop {

using MatVec = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

enum class Which { LargestMagnitude, LargestAlgebraic, SmallestAlgebraic };

struct KrylovOptions {
  int nev = 1;
  int max_dim = 60;
  int max_restarts = 60;
  double tol = 1e-13;  // residual relative to the largest Ritz value modulus
  unsigned seed = 12345;
  Eigen::VectorXcd start;  // used when nonempty
};

struct KrylovResult {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // unit columns
  Eigen::VectorXd residuals;
  int matvecs = 0;
  bool converged = false;
};

// Thick-restart Rayleigh-Ritz on a Krylov space with full reorthogonalization.
// hermitian selects the symmetric projected problem (real Ritz values).
KrylovResult krylov_eigs(const MatVec& op, int n, bool hermitian, Which which,
                         const KrylovOptions& opts = {});

}  // namespace bsop
