#pragma once

#include <memory>
#include <vector>

#include "bsop/annulus.hpp"
#include "bsop/operator.hpp"
#include "bsop/spectral.hpp"

namespace bsop {

// Shared state for evaluations of g lambda1(k, E) - 1 at real E.
struct FermiContext {
  std::shared_ptr<const Model> model;
  double E = 0.0;
  double g = 0.0;
  EigOptions eig;
  int threads = 1;
};

struct LevelValue {
  double value = 0.0;  // g lambda1 - 1
  double lambda1 = 0.0;
  Eigen::VectorXcd psi1;
};

// Evaluates g lambda1 - 1 at k in B_E^+; start seeds the Krylov iteration.
LevelValue level_value(const FermiContext& ctx, const QuasiMomentum& k,
                       const Eigen::VectorXcd& start = {});

// Largest HS norm of C over probe points inside the layer p_I in (0, p_max].
double measured_c(std::shared_ptr<const Model> model, double E, double p_max, int n_angles = 4,
                  int n_radii = 3);

struct RadialRoot {
  double theta = 0.0;
  double radius = 0.0;
  QuasiMomentum k;
  double lambda1 = 0.0;
  double residual = 0.0;      // |g lambda1 - 1|
  double value_inner = 0.0;   // g lambda1 - 1 at the inner radius
  double value_outer = 0.0;   // g lambda1 - 1 at the outer radius
  int evaluations = 0;
};

constexpr double kRootTolerance = 1e-8;

// Root of g lambda1(r (cos theta, sin theta), E) = 1 bracketed by the annulus radii.
RadialRoot radial_root(double theta, const Annulus& ann, const FermiContext& ctx);

enum class TraceMode { RadialScan, Continuation };

const char* to_string(TraceMode mode);

struct CurveNode {
  double theta = 0.0;
  QuasiMomentum k;
  double radius = 0.0;
  double lambda1 = 0.0;
  double residual = 0.0;
  double gradient = -1.0;  // |grad lambda1| when computed, else negative
};

struct FermiCurve {
  TraceMode mode = TraceMode::RadialScan;
  std::vector<CurveNode> nodes;
  double step = 0.0;          // largest distance between consecutive nodes
  double closure_gap = 0.0;   // distance from the last node back to the first
  int winding_number = 0;
  bool simple = false;
  bool closed() const { return closure_gap <= step; }
};

FermiCurve trace_curve(const Annulus& ann, int n_theta, TraceMode mode, const FermiContext& ctx);

// Winding number of the closed polyline about the origin.
int winding_number(const std::vector<QuasiMomentum>& poly);
// True when no two non-adjacent segments of the closed polyline intersect.
bool polyline_simple(const std::vector<QuasiMomentum>& poly);

struct CurveReport {
  double min_radius = 0.0;
  double max_radius = 0.0;
  double max_residual = 0.0;
  double min_gradient = 0.0;     // empirical lower bound on |grad lambda1| along the curve
  double smoothness = 0.0;       // max |second difference of radius in theta|
  bool within_annulus = false;
  bool gradients = false;        // min_gradient filled
};

CurveReport curve_report(const FermiCurve& curve, const Annulus& ann, const FermiContext& ctx,
                         bool gradients = true);

struct GScaling {
  std::vector<double> g;
  std::vector<double> offset;  // root radius - sqrt(E)
  double exponent = 0.0;
};

// Radius offsets of the root along one ray for each coupling, with the log-log slope.
GScaling g_scaling(const FermiContext& ctx, double s, double c_bound, double delta,
                   const std::vector<double>& couplings, double theta = 0.0);

}  // namespace bsop
