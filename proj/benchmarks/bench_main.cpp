#include <random>

#include <benchmark/benchmark.h>

#include "scene_analogy/evaluation.hpp"
#include "scene_analogy/feature_field.hpp"
#include "scene_analogy/point_index.hpp"
#include "scene_analogy/testkit.hpp"
#include "scene_analogy/tps.hpp"

using namespace scene_analogy;

namespace {

std::vector<Vec3> cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> out(n);
    for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
    return out;
}

void BM_Knn(benchmark::State& state) {
    const PointIndex index(cloud(20000, 1));
    const auto queries = cloud(1024, 2);
    const auto k = static_cast<std::size_t>(state.range(0));
    std::vector<PointIndex::Neighbor> out;
    std::size_t i = 0;
    for (auto _ : state) {
        index.knn(queries[i++ % queries.size()], k, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_Knn)->Arg(1)->Arg(8)->Arg(100);

void BM_FieldQuery(benchmark::State& state) {
    const auto scene = testkit::gen_scene(testkit::random_layout(3, 6));
    const auto field = build_field(scene);
    const auto queries = cloud(1024, 4);
    std::size_t i = 0;
    for (auto _ : state) {
        // nearby queries reuse the previous neighbor set as a hint
        const Vec3 q = Vec3(0.8, 0.8, 0.4) + 0.01 * queries[i++ % queries.size()];
        benchmark::DoNotOptimize(field.query(q));
    }
}
BENCHMARK(BM_FieldQuery);

void BM_TpsFit(benchmark::State& state) {
    const auto src = cloud(static_cast<std::size_t>(state.range(0)), 5);
    std::vector<PointPair> pairs;
    for (const auto& p : src) pairs.push_back({p, p + 0.1 * Vec3(p.y(), p.z(), p.x())});
    for (auto _ : state) benchmark::DoNotOptimize(fit_tps(pairs));
}
BENCHMARK(BM_TpsFit)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Chamfer(benchmark::State& state) {
    const auto a = cloud(5000, 6), b = cloud(5000, 7);
    for (auto _ : state) benchmark::DoNotOptimize(chamfer_accuracy(a, b));
}
BENCHMARK(BM_Chamfer)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
