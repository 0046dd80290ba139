#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "bsop/lap.hpp"
#include "bsop/operator.hpp"
#include "bsop/spectral.hpp"

namespace {

using namespace bsop;

constexpr double kTwoPi = 6.283185307179586;
constexpr double kE = 0.1;

// Reference node spacing h = 0.3125 with the box growing in n1.
std::shared_ptr<const Model> model_for(int n1) {
  const auto lat = make_lattice(kTwoPi, kTwoPi);
  return std::make_shared<const Model>(build_potential({}, lat, Grid{0.15625 * n1, n1, 2, 9}));
}

const QuasiMomentum kProbe{0.35, 0.1};

Eigen::VectorXcd random_vector(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(N(rng), N(rng));
  return v;
}

void BM_Assemble(benchmark::State& state) {
  const auto model = model_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_gamma(model, kProbe, kE, 0.0));
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Apply(benchmark::State& state) {
  const auto model = model_for(static_cast<int>(state.range(0)));
  const auto G = assemble_gamma(model, kProbe, kE, 0.0);
  const auto v = random_vector(G.dim());
  for (auto _ : state) benchmark::DoNotOptimize(G.apply(v));
}
BENCHMARK(BM_Apply)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ApplySpectral(benchmark::State& state) {
  const auto model = model_for(static_cast<int>(state.range(0)));
  const auto v = random_vector(model->dim());
  for (auto _ : state) benchmark::DoNotOptimize(apply_gamma_spectral(*model, v, kProbe, kE));
}
BENCHMARK(BM_ApplySpectral)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LeadingEig(benchmark::State& state) {
  const auto model = model_for(static_cast<int>(state.range(0)));
  const auto G = assemble_gamma(model, kProbe, kE, 0.0);
  EigOptions o;
  o.dense_limit = 0;
  for (auto _ : state) benchmark::DoNotOptimize(leading_eig(G, o));
}
BENCHMARK(BM_LeadingEig)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Gft(benchmark::State& state) {
  const int n1 = static_cast<int>(state.range(0));
  const LapGrid lg(make_lattice(kTwoPi, kTwoPi), 40.0, n1, 9);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXcd u(n1, lg.modes().size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = cplx(N(rng), N(rng));
  for (auto _ : state) benchmark::DoNotOptimize(gft(u, lg, kProbe));
}
BENCHMARK(BM_Gft)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
