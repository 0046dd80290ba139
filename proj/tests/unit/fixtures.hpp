#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "bsop/annulus.hpp"
#include "bsop/fermi.hpp"
#include "bsop/lap.hpp"
#include "bsop/operator.hpp"

namespace bsop::test {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kE = 0.1;
constexpr double kS = 6.0;

inline QuasiMomentum polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

inline std::shared_ptr<const Model> make_model(const Grid& grid, const PotentialSpec& spec = {}) {
  const auto lat = make_lattice(kTwoPi, kTwoPi);
  return std::make_shared<const Model>(build_potential(spec, lat, grid));
}

// Small grid on which the reference regime still holds (h as on the reference grid).
inline const std::shared_ptr<const Model>& small_model() {
  static const auto m = make_model(Grid{20.0, 128, 1, 5});
  return m;
}

struct Regime {
  double c_bound = 0.0;
  double g = 0.0;
  Annulus annulus;
};

inline const Regime& small_regime() {
  static const Regime r = [] {
    Regime out;
    out.c_bound = 1.1 * measured_c(small_model(), kE, 0.03);
    out.g = 0.5 / (kS * out.c_bound);
    out.annulus = make_annulus(small_model()->lattice(), kE, out.g, kS, out.c_bound, 1.0);
    return out;
  }();
  return r;
}

inline std::vector<double> nodes_x(const Grid& g) {
  std::vector<double> x;
  for (int i = 0; i < g.N1; ++i) x.push_back(g.x(i));
  return x;
}

inline Eigen::VectorXcd random_state(const Model& m, std::mt19937_64& rng) {
  const Eigen::MatrixXcd v = smooth_random_channels(nodes_x(m.grid()), m.nm(), rng);
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
}

inline Channels random_channels(const Model& m, std::mt19937_64& rng) {
  return {m.h(), m.grid().x(0), m.modes(), smooth_random_channels(nodes_x(m.grid()), m.nm(), rng)};
}

inline int zero_mode(const std::vector<DualMode>& modes) {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].is_zero()) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace bsop::test
