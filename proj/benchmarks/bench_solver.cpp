#include <benchmark/benchmark.h>

#include "tempogan/sim.hpp"

using namespace tempogan;

static void BM_SolverStep(benchmark::State& state) {
    const int n = int(state.range(0));
    SceneSpec spec = SceneSpec::randomized(3, {n, n}, 60);
    GridField rho(spec.shape, 1), vel(spec.shape, 2), pressure(spec.shape, 1);
    // a few warm-up steps so the pressure solve sees realistic fields
    for (int i = 0; i < 3; ++i) solver_step(rho, vel, spec, &pressure);
    for (auto _ : state) {
        solver_step(rho, vel, spec, &pressure);
        benchmark::DoNotOptimize(vel.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * n * n);
}
BENCHMARK(BM_SolverStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
