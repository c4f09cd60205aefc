#include <benchmark/benchmark.h>

#include <random>

#include "lyap/avalanche.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/ldt.hpp"
#include "lyap/linalg.hpp"
#include "lyap/random_products.hpp"

using namespace lyap;

namespace {

RealMatrix random_matrix(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    RealMatrix m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = z(rng);
    return m;
}

CocycleFamily schrodinger() {
    return CocycleFamily::create(ShiftBase::golden(), SchrodingerCocycle{3.0}, ParameterGrid::single(0.0));
}

void BM_Svd(benchmark::State& state) {
    const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(singular_values(m));
}
BENCHMARK(BM_Svd)->DenseRange(2, 6, 2)->Arg(20);

void BM_ExteriorPower(benchmark::State& state) {
    const auto m = random_matrix(6, 2);
    const auto p = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(exterior_power(m, p));
}
BENCHMARK(BM_ExteriorPower)->DenseRange(1, 3);

void BM_ProductOrbit(benchmark::State& state) {
    const auto fam = schrodinger();
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = TorusPoint::on_circle(0.123);
    for (auto _ : state) benchmark::DoNotOptimize(product_orbit(fam, x, 0.0, n));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProductOrbit)->Arg(1024)->Arg(4096);

void BM_FiniteScaleExponents(benchmark::State& state) {
    const auto fam = schrodinger();
    for (auto _ : state) benchmark::DoNotOptimize(finite_scale_exponents(fam, 0.0, 256, 256));
}
BENCHMARK(BM_FiniteScaleExponents)->Unit(benchmark::kMillisecond);

void BM_DeviationMeasure(benchmark::State& state) {
    const auto fam = schrodinger();
    for (auto _ : state) benchmark::DoNotOptimize(deviation_measure(fam, 0.0, 256, 1, 0.1, 256));
}
BENCHMARK(BM_DeviationMeasure)->Unit(benchmark::kMillisecond);

void BM_ApDiscrepancy(benchmark::State& state) {
    std::vector<RealMatrix> ms;
    for (std::int64_t j = 0; j < state.range(0); ++j) ms.push_back(random_matrix(3, 100 + j));
    const ApInput in(ms);
    for (auto _ : state) benchmark::DoNotOptimize(ap_discrepancy(in));
}
BENCHMARK(BM_ApDiscrepancy)->Arg(16)->Arg(64);

void BM_RandomProduct(benchmark::State& state) {
    const auto dist = MatrixDistribution::furstenberg_example(7);
    std::uint64_t stream = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_product(dist, 1000, stream++));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RandomProduct);

}  // namespace
BENCHMARK_MAIN();
