#pragma once

#include <memory>
#include <vector>

#include "bsop/lap.hpp"
#include "bsop/operator.hpp"
#include "bsop/spectral.hpp"

namespace bsop {

struct NullVector {
  Eigen::VectorXcd v;         // unit state with (I - g Gamma) v ~ 0
  cplx eigenvalue;            // eigenvalue of Gamma nearest 1/g
  double distance = 0.0;      // |eigenvalue - 1/g|
  double residual = 0.0;      // ||(I - g Gamma) v|| / ||v||
  int near_multiplicity = 0;  // computed eigenvalues within the distance threshold of 1/g
};

constexpr double kNullDistance = 1e-6;
constexpr double kNullResidual = 1e-7;

// Eigenvector of Gamma_k(E) for the eigenvalue nearest 1/g.
NullVector null_vector(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E, double g,
                       const EigOptions& opts = {});

struct GuidedOptions {
  // output grid reaches this many decay lengths 1/p_I of the slowest channel
  double decay_lengths = 30.0;
};

struct GuidedState {
  QuasiMomentum k;
  double E = 0.0;
  double g = 0.0;
  Channels u;                 // g R0(k, E) W v on the extended grid
  double eigen_residual = 0.0;  // ||(H(k) - E) u|| / ||u||
  double consistency = 0.0;     // ||W u - v|| / ||v||
  double box_half_length = 0.0; // support box of the discretized W
};

GuidedState build_guided_state(const NullVector& nv, const Model& model, const QuasiMomentum& k, double E,
                               double g, const GuidedOptions& opts = {});

struct DecayReport {
  std::vector<double> moments;  // ||u||_{H_m}, m = 0..m_max
  double decay_rate = 0.0;      // fitted rate of sum_K |u_K(x1)|^2 on the outer half of the grid
  double predicted_rate = 0.0;  // 2 p_I(k, E)
  bool asymptotic = false;      // fit window lies outside the support box of W
  double relative_error() const { return std::abs(decay_rate - predicted_rate) / predicted_rate; }
};

DecayReport decay_report(const GuidedState& state, int m_max = 6);

// |coefficient at xi = 0| and |its xi-derivative| of the zero-mode channel,
// relative to the channel norm.
struct FourierVanishing {
  double value = 0.0;
  double derivative = 0.0;
};

FourierVanishing fourier_vanishing(const Channels& f, int zero_mode);

struct BoundaryCheck {
  std::vector<double> eps;
  std::vector<double> sigma_min;   // smallest singular value of I - g Gamma(E + i eps)
  // The zero-channel term i g / (2|S| p) with p = (i eps)^{1/2} sweeps through
  // |1 - g Lambda| ~ 1/sqrt(2) before it decouples, so the limit is fitted as
  // sigma0 + a sqrt(eps) on a tail where |g Lambda| >> 1.
  std::vector<double> tail_eps;
  std::vector<double> tail_sigma;
  double extrapolated = 0.0;
  double slope = 0.0;
  double fit_residual = 0.0;       // max |sigma_i - fit_i| on the tail
  bool conclusive = false;
  bool hypotheses = false;         // potential satisfies the half-space conditions
  FourierVanishing candidate;      // of W^2 u for the smallest-eps singular vector
  // all reported values and the limit bounded away from zero
  bool pass() const;
};

BoundaryCheck boundary_case_check(std::shared_ptr<const Model> model, const QuasiMomentum& k, double E,
                                  double g, const std::vector<double>& eps_sequence,
                                  const std::vector<double>& tail = {1e-6, 1e-7, 1e-8},
                                  const EigOptions& opts = {});

}  // namespace bsop
