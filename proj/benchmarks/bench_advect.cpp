#include <benchmark/benchmark.h>

#include "tempogan/advect.hpp"
#include "tempogan/rng.hpp"

using namespace tempogan;

namespace {
GridField random_velocity(int n, uint64_t seed) {
    GridField v({n, n}, 2);
    Rng rng(seed);
    for (float& x : v.values()) x = float(rng.uniform(-1.5, 1.5));
    return v;
}
} // namespace

static void BM_BuildCoeffs(benchmark::State& state) {
    const int n = int(state.range(0));
    GridField v = random_velocity(n, 11);
    for (auto _ : state) {
        AdvectionCoeffs c = build_coeffs(v, 1.0f);
        benchmark::DoNotOptimize(&c);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * n * n);
}
BENCHMARK(BM_BuildCoeffs)->Arg(64)->Arg(256);

static void BM_AdvectApply(benchmark::State& state) {
    const int n = int(state.range(0));
    GridField v = random_velocity(n, 11);
    GridField rho({n, n}, 1, 0.5f);
    AdvectionCoeffs c = build_coeffs(v, 1.0f);
    for (auto _ : state) {
        GridField out = advect_apply(c, rho);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * n * n);
}
BENCHMARK(BM_AdvectApply)->Arg(64)->Arg(256);
