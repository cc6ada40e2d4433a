// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "skinfx/bem.hpp"
#include "skinfx/metrics.hpp"
#include "skinfx/toeplitz.hpp"

using namespace skinfx;

namespace {

void BM_assemble_omp(benchmark::State& state) {
    const SphereLayout l = build_chain(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_single_layer(l, {}).matrix.data());
}

void BM_assemble_serial(benchmark::State& state) {
    const SphereLayout l = build_chain(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_single_layer_serial(l, {}).matrix.data());
}

const SymbolCoefficients& chain_symbol() {
    static const SymbolCoefficients s = limit_coefficients({}, MaterialParams::uniform(1.0), 10, 41);
    return s;
}

std::vector<cdouble> probes(int side) {
    return curve_bounding_grid(sample_symbol_curve(chain_symbol()), side, side);
}

void BM_winding_omp(benchmark::State& state) {
    const auto p = probes(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(winding_grid(chain_symbol(), p).data());
}

void BM_winding_serial(benchmark::State& state) {
    const auto p = probes(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(winding_grid_serial(chain_symbol(), p).data());
}

DisorderSpec small_ensemble() {
    DisorderSpec spec;
    spec.epsilon = 0.1;
    spec.trials = 4;
    spec.seed = 1;
    return spec;
}

void BM_ensemble_omp(benchmark::State& state) {
    const SphereLayout l = build_chain(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(run_ensemble(l, MaterialParams::uniform(1.0), small_ensemble()).mean.meanProportion);
}

void BM_ensemble_serial(benchmark::State& state) {
    const SphereLayout l = build_chain(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            run_ensemble_serial(l, MaterialParams::uniform(1.0), small_ensemble()).mean.meanProportion);
}

}  // namespace

BENCHMARK(BM_assemble_omp)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble_serial)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_winding_omp)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_winding_serial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ensemble_omp)->Arg(30)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ensemble_serial)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
