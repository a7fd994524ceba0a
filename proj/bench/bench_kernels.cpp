#include "dcwave/dynkin.hpp"
#include "dcwave/fbi.hpp"

#include <benchmark/benchmark.h>

using namespace dcwave;

namespace {

const GridFunction& conormal()
{
    static GridFunction g = fbi_fixture("conormal2d");
    return g;
}

const WeightSequence& gevrey2()
{
    static WeightSequence s = make_gevrey(2.0, 512);
    return s;
}

ScanConfig scan_config()
{
    ScanConfig cfg;
    cfg.n_directions = 16;
    return cfg;
}

void BM_ScanSerial(benchmark::State& st)
{
    double x[2] = {0.0, 0.0};
    for (auto _ : st) benchmark::DoNotOptimize(wavefront_scan_serial(conormal(), x, scan_config(), gevrey2()));
}

void BM_ScanParallel(benchmark::State& st)
{
    double x[2] = {0.0, 0.0};
    for (auto _ : st) benchmark::DoNotOptimize(wavefront_scan(conormal(), x, scan_config(), gevrey2()));
}

struct FlatnessSetup {
    JetSpace sp = make_space(1, 0, 24);
    VectorFieldJet L = field_from(sp, {Jet::variable(sp, 0)});
    ApproxSolution sol;

    FlatnessSetup() : sol(make())
    {
    }

    ApproxSolution make()
    {
        Jet f(sp);
        for (int m = 0; m <= 12; ++m) f.set({2 * m}, m % 2 ? -1.0 : 1.0);
        WeightSequence seq = make_gevrey(2.0, 4096);
        FormalSeries s = formal_solution(L, f, 24);
        GrowthEstimate g = growth_fit(s, seq, Box{{-0.5}, {0.5}});
        return ApproxSolution(s, seq, g.C_fit, make_kernel());
    }
};

const FlatnessSetup& flat()
{
    static FlatnessSetup s;
    return s;
}

void BM_FlatnessSerial(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(sample_flatness_serial(flat().sol, flat().L, -0.5, 0.5, 21, 1e-3, 24));
}

void BM_FlatnessParallel(benchmark::State& st)
{
    for (auto _ : st) benchmark::DoNotOptimize(sample_flatness(flat().sol, flat().L, -0.5, 0.5, 21, 1e-3, 24));
}

}  // namespace

BENCHMARK(BM_ScanSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScanParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlatnessSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FlatnessParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
