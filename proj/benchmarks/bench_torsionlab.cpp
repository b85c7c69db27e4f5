#include <benchmark/benchmark.h>

#include "torsionlab/lueck.hpp"
#include "torsionlab/random.hpp"

using namespace torsionlab;

namespace {

void BM_LogVol(benchmark::State& state) {
    RandomSource rng(1);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const TraceContext ctx = TraceContext::complex_field();
    const HilbertModule w = HilbertModule::free(ctx, n);
    const Morphism f(w, w, random_a_linear(ctx, n, n, rng));
    for (auto _ : state) benchmark::DoNotOptimize(log_vol(f));
}
BENCHMARK(BM_LogVol)->Arg(8)->Arg(32)->Arg(128);

void BM_TorsionRoutes(benchmark::State& state) {
    RandomSource rng(2);
    RandomComplexShape shape;
    shape.length = 4;
    shape.max_pairs = static_cast<int>(state.range(0));
    const CochainComplex c = random_complex(TraceContext::finite_group(FiniteGroup::symmetric(3)), shape, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(torsion(c));
        benchmark::DoNotOptimize(torsion_via_laplacians(c));
    }
}
BENCHMARK(BM_TorsionRoutes)->Arg(1)->Arg(3)->Arg(6);

void BM_MilnorCheck(benchmark::State& state) {
    RandomSource rng(3);
    const ComplexSES ses = random_bounded_ses(TraceContext::finite_group(FiniteGroup::cyclic(3)), 4, 6, rng);
    for (auto _ : state) benchmark::DoNotOptimize(milnor_check(ses));
}
BENCHMARK(BM_MilnorCheck);

void BM_Tower(benchmark::State& state) {
    const LaurentMatrix op = LaurentMatrix::scalar(LaurentPoly::parse("2 - t - t^-1"));
    const std::vector<int> levels = parse_levels("2.." + std::to_string(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_tower(op, levels));
}
BENCHMARK(BM_Tower)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_FourierLogDet(benchmark::State& state) {
    const LaurentMatrix op = LaurentMatrix::scalar(LaurentPoly::parse("(1 - t)(1 - t^-1)(3 + t + t^-1)"));
    for (auto _ : state) benchmark::DoNotOptimize(fourier_log_det(op));
}
BENCHMARK(BM_FourierLogDet)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
