#include "bvlab/cellular.hpp"
#include "bvlab/feyngraph.hpp"
#include "bvlab/homotopy.hpp"
#include "bvlab/wick.hpp"

#include <benchmark/benchmark.h>

using namespace bvlab;

static void BM_enumerate(benchmark::State& state) {
    const auto prof = feyn::ValencyProfile::plain({{3, static_cast<int>(state.range(0))}});
    for (auto _ : state) benchmark::DoNotOptimize(feyn::enumerate(prof));
}
BENCHMARK(BM_enumerate)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_quartic_series(benchmark::State& state) {
    auto pf = wick::parse_problem("Q 0 0 1\nP 4 0 0 0 0 1\n", wick::Kind::even);
    auto q = wick::QuadraticData::make(pf.q, wick::Kind::even);
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(wick::perturbative_expectation(q, pf.p, order));
}
BENCHMARK(BM_quartic_series)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_pfaffian(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    RMatrix a = zero_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            a[i][j] = Rational(static_cast<long>((i * 7 + j * 3) % 5) - 2);
            a[j][i] = -a[i][j];
        }
    for (auto _ : state) benchmark::DoNotOptimize(wick::pfaffian(a));
}
BENCHMARK(BM_pfaffian)->Arg(4)->Arg(6)->Arg(8);

static void BM_transfer(benchmark::State& state) {
    const auto f = homotopy::toy_fixtures().front();
    const int leaves = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(homotopy::transfer(f.v, f.data, leaves));
}
BENCHMARK(BM_transfer)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_building_block(benchmark::State& state) {
    const auto g = homotopy::so3();
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cellular::building_block(g, n, 3));
}
BENCHMARK(BM_building_block)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_circle(benchmark::State& state) {
    const auto g = homotopy::so3();
    const auto tri = cellular::CellComplex1D::polygon(3);
    for (auto _ : state) benchmark::DoNotOptimize(cellular::circle_effective(tri, g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_circle)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
