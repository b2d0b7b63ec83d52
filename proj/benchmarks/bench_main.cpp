#include <benchmark/benchmark.h>

#include "torusmfg/diagnostics.hpp"
#include "torusmfg/stationary.hpp"

namespace {

using namespace tmfg;

const ModelParams kUnit{1.0, 1.0};

void BM_Laplacian(benchmark::State& state) {
  const TorusGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const ScalarField f = von_mises(2.0, g).field();
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(f));
}
BENCHMARK(BM_Laplacian)->Args({1, 128})->Args({1, 1024})->Args({2, 64});

void BM_Wasserstein1(benchmark::State& state) {
  const TorusGrid g(1, static_cast<int>(state.range(0)));
  const Density a = von_mises(2.0, g);
  const Density b = m_eps_family(0.2, {1, 0}, g);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein1_circle(a, b));
}
BENCHMARK(BM_Wasserstein1)->Arg(128)->Arg(4096);

void BM_BoundedLipschitz(benchmark::State& state) {
  const TorusGrid g(1, static_cast<int>(state.range(0)));
  const Density a = von_mises(2.0, g);
  const Density b = m_eps_family(0.2, {1, 0}, g);
  for (auto _ : state) benchmark::DoNotOptimize(bounded_lipschitz_distance(a, b));
}
BENCHMARK(BM_BoundedLipschitz)->Arg(64)->Arg(256);

void BM_InteractionCost(benchmark::State& state) {
  const TorusGrid g(1, 128);
  const FourierKernel k(0.5, {{{1, 0}, -1.0}, {{2, 0}, 0.5}, {{3, 0}, 0.25}});
  const Density m = von_mises(2.0, g);
  for (auto _ : state) benchmark::DoNotOptimize(interaction_cost(k, m));
}
BENCHMARK(BM_InteractionCost);

void BM_StationaryHjb(benchmark::State& state) {
  const TorusGrid g(1, 128);
  const ScalarField f = interaction_cost(FourierKernel::kuramoto(6.0), m_eps_family(0.2, {1, 0}, g));
  for (auto _ : state) benchmark::DoNotOptimize(solve_stationary_hjb(f, kUnit, ScalarField(g), 500, 1e-12));
}
BENCHMARK(BM_StationaryHjb)->Unit(benchmark::kMillisecond);

void BM_SolveMfg(benchmark::State& state) {
  const TorusGrid g(1, 64);
  const FourierKernel k = FourierKernel::kuramoto(2.0);
  const Density m0 = von_mises(2.0, g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_mfg(k, kUnit, m0, TimeMesh(2.0, 2000), {}));
}
BENCHMARK(BM_SolveMfg)->Unit(benchmark::kMillisecond);

void BM_Diagnose(benchmark::State& state) {
  const TorusGrid g(1, 64);
  const FourierKernel k = FourierKernel::kuramoto(2.0);
  const FlowTrajectory traj = solve_mfg(k, kUnit, von_mises(2.0, g), TimeMesh(2.0, 2000), {});
  for (auto _ : state) benchmark::DoNotOptimize(diagnose(traj, k, kUnit));
}
BENCHMARK(BM_Diagnose)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
