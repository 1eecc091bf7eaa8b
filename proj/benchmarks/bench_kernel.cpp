#include <benchmark/benchmark.h>

#include "dirac/kernel.hpp"
#include "dirac/spectrum.hpp"

namespace {

dirac::PotentialPair trig_pair() {
  using dirac::Complex;
  return dirac::make_pair(
      dirac::Potential::trig({{1, Complex{1.0, 0.0}}, {0, Complex{0.3, 0.0}}},
                             256, 1.5),
      dirac::Potential::trig({{-2, Complex{0.5, 0.0}}}, 256, 1.5));
}

void BM_SigmaTilde(benchmark::State& state) {
  const auto pair = trig_pair();
  const dirac::TriangleGrid grid(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(dirac::sigma_tilde(pair, 1, grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SigmaTilde)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_NeumannSolve(benchmark::State& state) {
  const auto pair = trig_pair();
  const dirac::TriangleGrid grid(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(dirac::neumann_solve(pair, grid, 1e-10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NeumannSolve)->RangeMultiplier(2)->Range(64, 256)->Complexity();

void BM_CharFnKernel(benchmark::State& state) {
  const auto pair = trig_pair();
  const auto ws = dirac::build_workspace(pair, 512, 1e-10);
  double mu = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dirac::char_fn_kernel(pair, ws.Q, dirac::Complex{mu, 0.3}));
    mu += 0.37;
  }
}
BENCHMARK(BM_CharFnKernel);

}  // namespace

BENCHMARK_MAIN();
