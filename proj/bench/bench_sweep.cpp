// =============================================================================
// Parallel vs serial steady-state sweeps
// =============================================================================

#include <benchmark/benchmark.h>

#include <vector>

#include "vmc/losses.hpp"
#include "vmc/sim.hpp"

namespace {

std::vector<vmc::ConverterParams> duty_points() {
    std::vector<vmc::ConverterParams> points;
    for (int k = 0; k < 8; ++k) {
        vmc::ConverterParams p = vmc::ideal_params();
        p.duty = 0.6 + 0.25 * k / 7.0;
        points.push_back(p);
    }
    return points;
}

vmc::SimConfig bench_config() {
    vmc::SimConfig c;
    c.initial = vmc::InitialState::AnalyticPreload;
    c.steady_tol = 1e-6;
    return c;
}

void BM_SteadyStateSweepParallel(benchmark::State& state) {
    const auto points = duty_points();
    const auto config = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(vmc::steady_state_sweep(points, config));
}

void BM_SteadyStateSweepSerial(benchmark::State& state) {
    const auto points = duty_points();
    const auto config = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(vmc::steady_state_sweep_serial(points, config));
}

void BM_EfficiencySweepParallel(benchmark::State& state) {
    const std::vector<double> powers = {120.0, 180.0, 240.0, 300.0, 360.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            vmc::efficiency_sweep(vmc::ConverterParams{}, powers, vmc::sweep_config()));
    }
}

void BM_EfficiencySweepSerial(benchmark::State& state) {
    const std::vector<double> powers = {120.0, 180.0, 240.0, 300.0, 360.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            vmc::efficiency_sweep_serial(vmc::ConverterParams{}, powers, vmc::sweep_config()));
    }
}

}  // namespace

BENCHMARK(BM_SteadyStateSweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SteadyStateSweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EfficiencySweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EfficiencySweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
