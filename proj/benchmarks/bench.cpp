#include <benchmark/benchmark.h>

#include <random>

#include "scenery/correlations.hpp"
#include "scenery/reconstruct.hpp"
#include "scenery/symmetric.hpp"
#include "scenery/vandermonde.hpp"

using namespace scenery;

namespace {

Scenery three_arcs() { return Scenery::intervals({{0.3, 1.5}, {2.2, 3.3}, {4.1, 5.6}}); }

void BM_GammaHat(benchmark::State& state) {
  const StepLaw law(1, Brownian{{0.7}, {0.3}}, JumpPart{2.0, {{1.0, {0.5}, {0.2}}}});
  std::vector<int> k = {3};
  for (auto _ : state) benchmark::DoNotOptimize(law.gamma_hat(0.4, k));
}
BENCHMARK(BM_GammaHat);

void BM_SpatialCorrelation(benchmark::State& state) {
  const Scenery s = three_arcs();
  const PointerTuple y = pointers_1d({0.4, 1.1, 2.0});
  for (auto _ : state) benchmark::DoNotOptimize(spatial_correlation(s, y));
}
BENCHMARK(BM_SpatialCorrelation);

void BM_ExactTemporalFourier(benchmark::State& state) {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_temporal_fourier(law, s, {0.5, 0.7}, K).value);
}
BENCHMARK(BM_ExactTemporalFourier)->Arg(10)->Arg(30)->Arg(60);

void BM_ExactTemporalQuadrature(benchmark::State& state) {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  for (auto _ : state) benchmark::DoNotOptimize(exact_temporal_quadrature(law, s, {0.5, 0.7}));
}
BENCHMARK(BM_ExactTemporalQuadrature)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  MonteCarloOptions mc;
  mc.blocks = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_temporal(law, s, {0.5}, mc).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_VandermondeSolve(benchmark::State& state) {
  const auto l = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-pi, pi), r(0.2, 1.0);
  std::vector<Complex> z;
  for (std::size_t i = 0; i < l; ++i) z.push_back(std::polar(r(rng), u(rng)));
  const GeneratorSet g(z);
  std::vector<Complex> b(2 * l, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(vandermonde_solve(g, b).x);
}
BENCHMARK(BM_VandermondeSolve)->Arg(7)->Arg(15)->Arg(31);

void BM_MaximalGrid(benchmark::State& state) {
  const Scenery s = three_arcs();
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    GridSearchResult r = maximal_grid(exact_grid_oracle(s, m), m, 1);
    benchmark::DoNotOptimize(r.subset.points.size());
  }
}
BENCHMARK(BM_MaximalGrid)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SymmetricRecovery(benchmark::State& state) {
  const Scenery s = three_arcs();
  const int m = 16;
  for (auto _ : state) {
    GridCorrelation g(s, m);
    auto table = symmetric_recover([&](std::span<const int> k) { return g.sigma(k); }, m, 3, 6);
    benchmark::DoNotOptimize(table.size());
  }
}
BENCHMARK(BM_SymmetricRecovery)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
