#include <benchmark/benchmark.h>

#include "mfid/analytics.hpp"
#include "mfid/cubical.hpp"
#include "mfid/persim.hpp"
#include "mfid/random.hpp"
#include "mfid/synthgen.hpp"

using namespace mfid;

namespace {

GrayImage noise_chip(std::size_t side, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> px(side * side);
    for (double& v : px) v = rng.uniform01();
    return GrayImage(side, side, std::move(px));
}

void BM_PersistenceNoise(benchmark::State& state) {
    const auto chip = noise_chip(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(compute_persistence(chip));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PersistenceNoise)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_PersistenceT6Preset(benchmark::State& state) {
    const auto chip = generate_corpus(Preset::t6_like, 1, 128, 128, 5).front();
    for (auto _ : state) benchmark::DoNotOptimize(compute_persistence(chip));
}
BENCHMARK(BM_PersistenceT6Preset)->Unit(benchmark::kMicrosecond);

void BM_BruteForce16(benchmark::State& state) {
    const auto chip = noise_chip(16, 2);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_persistence(chip));
}
BENCHMARK(BM_BruteForce16)->Unit(benchmark::kMillisecond);

void BM_Vectorize(benchmark::State& state) {
    Rng rng(3);
    PersistenceDiagram d;
    for (int i = 0; i < state.range(0); ++i) {
        const double b = rng.uniform01();
        d.points.push_back({b, b + (1.0 - b) * rng.uniform01()});
    }
    const PIGridSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(vectorize(d, spec));
}
BENCHMARK(BM_Vectorize)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_PcaFit(benchmark::State& state) {
    Rng rng(4);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(state.range(0)), std::vector<double>(100));
    for (auto& r : rows)
        for (double& v : r) v = rng.uniform01();
    for (auto _ : state) benchmark::DoNotOptimize(pca_fit(rows));
}
BENCHMARK(BM_PcaFit)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
