#include <benchmark/benchmark.h>

#include "scenes.hpp"
#include "uwimf/estimation.hpp"
#include "uwimf/formation.hpp"
#include "uwimf/metrics.hpp"
#include "uwimf/wavelet.hpp"

namespace {

using namespace uwimf;

testing::Scene scene_of(int size) {
    testing::SceneOptions o;
    o.width = size;
    o.height = size;
    return testing::textured_scene(o, 17);
}

WaterParams water() {
    DeterministicRng rng(3);
    return testing::random_params(rng, {});
}

void BM_Synthesize(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    const WaterParams p = water();
    for (auto _ : state) benchmark::DoNotOptimize(synthesize(s.clear, s.z, p));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Synthesize)->Arg(128)->Arg(512);

void BM_Restore(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    const Synthesis syn = synthesize(s.clear, s.z, water());
    for (auto _ : state) benchmark::DoNotOptimize(restore(syn.image, syn.components));
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Restore)->Arg(128)->Arg(512);

void BM_Dwt2Rgb(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dwt2_rgb(s.clear));
}
BENCHMARK(BM_Dwt2Rgb)->Arg(128)->Arg(512);

void BM_Ssim(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    const Synthesis syn = synthesize(s.clear, s.z, water());
    for (auto _ : state) benchmark::DoNotOptimize(ssim(s.clear, syn.image));
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(512);

void BM_Uiqm(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(uiqm(s.clear));
}
BENCHMARK(BM_Uiqm)->Arg(128)->Arg(512);

void BM_Uciqe(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(uciqe(s.clear));
}
BENCHMARK(BM_Uciqe)->Arg(128)->Arg(512);

void BM_EstimateWaterParams(benchmark::State& state) {
    const auto s = scene_of(static_cast<int>(state.range(0)));
    const Synthesis syn = synthesize(s.clear, s.z, water());
    for (auto _ : state) benchmark::DoNotOptimize(estimate_water_params(syn.image, s.z));
}
BENCHMARK(BM_EstimateWaterParams)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
