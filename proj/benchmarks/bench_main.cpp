#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cornerseg/pipeline.hpp"
#include "cornerseg/synth.hpp"
#include "cornerseg/targets.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cornerseg;

namespace {

void BM_RotatedIou(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<std::pair<RotatedRect, RotatedRect>> pairs;
    for (int i = 0; i < 256; ++i) {
        const RotatedRect a = gen::rect(rng, 0, 100, 5, 40);
        pairs.emplace_back(a, gen::rect_near(rng, a, 5, 40));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ % pairs.size()];
        benchmark::DoNotOptimize(rotated_iou(a, b));
    }
}
BENCHMARK(BM_RotatedIou);

void BM_RpsPool(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const Tensor3D seg = gen::tensor(rng, 4, 512, 512);
    const RotatedRect box = canonical_corner_order(from_center_form(256, 256, 160, 40, 0.4));
    for (auto _ : state) benchmark::DoNotOptimize(rps_roi_average_pool(box, seg, 2));
}
BENCHMARK(BM_RpsPool)->Unit(benchmark::kMicrosecond);

void BM_RpsPoolLiteral(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const Tensor3D seg = gen::tensor(rng, 4, 512, 512);
    const RotatedRect box = canonical_corner_order(from_center_form(256, 256, 160, 40, 0.4));
    for (auto _ : state) benchmark::DoNotOptimize(oracle::literal_rps_pool(box, seg, 2));
}
BENCHMARK(BM_RpsPoolLiteral)->Unit(benchmark::kMillisecond);

void BM_DetectSynthScene(benchmark::State& state) {
    SynthConfig cfg;
    cfg.min_boxes = cfg.max_boxes = static_cast<int>(state.range(0));
    const SynthScene scene = generate_scene(cfg, 3);
    PipelineConfig pcfg;
    pcfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(detect(scene.corners, scene.masks, pcfg));
}
BENCHMARK(BM_DetectSynthScene)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_MatchDefaultBoxes(benchmark::State& state) {
    const auto boxes = generate_default_boxes(DefaultBoxConfig{});
    const SynthScene scene = generate_scene(SynthConfig{}, 5);
    std::vector<CornerSquare> squares;
    for (const RotatedRect& r : scene.annotation.boxes) {
        for (const CornerSquare& s : corner_squares(r)) squares.push_back(s);
    }
    for (auto _ : state) benchmark::DoNotOptimize(match(boxes, squares));
}
BENCHMARK(BM_MatchDefaultBoxes)->Unit(benchmark::kMillisecond);

void BM_RotatedNms(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::vector<Detection> dets;
    for (int i = 0; i < state.range(0); ++i) dets.push_back({gen::rect(rng, 0, 300, 5, 80), gen::uniform(rng, 0, 1)});
    for (auto _ : state) benchmark::DoNotOptimize(rotated_nms(dets, 0.3));
}
BENCHMARK(BM_RotatedNms)->Arg(50)->Arg(200)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
