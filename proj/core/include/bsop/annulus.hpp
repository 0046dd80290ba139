#pragma once

#include "bsop/geometry.hpp"

namespace bsop {

// Rotation-invariant layer q_- g < p_I(k, E) < q_+ g around |k| = sqrt(E).
struct Annulus {
  double E = 0.0;
  double g = 0.0;
  double s = 0.0;
  double q_minus = 0.0;
  double q_plus = 0.0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  bool contains(const QuasiMomentum& k) const;
  // inner <= |k| <= outer up to a relative slack
  bool contains_closed(const QuasiMomentum& k, double slack = 1e-12) const;
};

double separation_threshold();  // 3 + sqrt(5)

// c_bound is the HS bound on C used for the coupling ceiling 1 / (s c_bound).
Annulus make_annulus(const LatticeGeometry& lat, double E, double g, double s, double c_bound,
                     double delta);

}  // namespace bsop
