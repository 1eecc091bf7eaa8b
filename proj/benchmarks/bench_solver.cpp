#include <benchmark/benchmark.h>

#include "dirac/solver.hpp"

namespace {

dirac::PotentialPair const_pair() {
  return dirac::make_pair(dirac::Potential::constant(0.5, 1.5),
                          dirac::Potential::constant(0.5, 1.5));
}

void BM_SolveDirect(benchmark::State& state) {
  const auto pair = const_pair();
  const dirac::Complex mu{static_cast<double>(state.range(0)), 0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(dirac::solve_direct(pair, mu, 512, 1e-11));
}
BENCHMARK(BM_SolveDirect)->Arg(10)->Arg(100)->Arg(400);

void BM_SolveViaKernel(benchmark::State& state) {
  const auto pair = const_pair();
  const auto ws = dirac::build_workspace(pair, 512, 1e-10);
  const dirac::Complex mu{static_cast<double>(state.range(0)), 0.3};
  for (auto _ : state)
    benchmark::DoNotOptimize(dirac::solve_via_kernel(pair, ws.Q, mu, 512));
}
BENCHMARK(BM_SolveViaKernel)->Arg(10)->Arg(100)->Arg(400);

}  // namespace
