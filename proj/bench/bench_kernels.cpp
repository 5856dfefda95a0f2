// Serial reference vs OpenMP path for each parallel kernel. The second
// benchmark argument selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "dmchain/forest.hpp"
#include "dmchain/smote.hpp"
#include "dmchain/svm.hpp"
#include "dmchain/validation.hpp"

using namespace dmchain;

namespace {

FeatureMatrix blobs(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j)
        names.push_back("f" + std::to_string(j));
    FeatureMatrix m(names, 0);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 3 == 0;
        for (auto& v : x)
            v = z(rng) + (y ? 0.8 : 0.0);
        m.push_row(x, y);
    }
    return m;
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(1) ? "parallel" : "serial"); }

void BM_ForestTrain(benchmark::State& s) {
    const auto m = blobs(static_cast<std::size_t>(s.range(0)), 8, 1);
    models::ForestConfig cfg;
    cfg.n_estimators = 100;
    for (auto _ : s)
        benchmark::DoNotOptimize(models::RandomForest::train(m, cfg, exec_of(s)));
    label(s);
}

void BM_ForestPredict(benchmark::State& s) {
    const auto m = blobs(static_cast<std::size_t>(s.range(0)), 8, 2);
    models::ForestConfig cfg;
    cfg.n_estimators = 100;
    const auto forest = models::RandomForest::train(m, cfg);
    for (auto _ : s)
        benchmark::DoNotOptimize(forest.predict_proba_batch(m, exec_of(s)));
    label(s);
}

void BM_SmoteNeighbors(benchmark::State& s) {
    const auto m = blobs(static_cast<std::size_t>(s.range(0)), 8, 3);
    std::vector<std::size_t> pts(m.rows());
    std::iota(pts.begin(), pts.end(), 0);
    for (auto _ : s)
        benchmark::DoNotOptimize(smote::nearest_neighbors(m, pts, 5, exec_of(s)));
    label(s);
}

void BM_KernelMatrix(benchmark::State& s) {
    const auto m = blobs(static_cast<std::size_t>(s.range(0)), 8, 4);
    for (auto _ : s)
        benchmark::DoNotOptimize(models::kernel_matrix(m, 3, 1.0, exec_of(s)));
    label(s);
}

void BM_GridSearch(benchmark::State& s) {
    const auto m = blobs(static_cast<std::size_t>(s.range(0)), 6, 5);
    eval::HyperGrid g;
    g.lr.C = {0.1, 1, 10};
    for (auto _ : s)
        benchmark::DoNotOptimize(eval::grid_search(m, g, models::Algorithm::LogisticRegression, 5, 0, exec_of(s)));
    label(s);
}

} // namespace

BENCHMARK(BM_ForestTrain)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestPredict)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmoteNeighbors)->ArgsProduct({{1000, 4000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelMatrix)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch)->ArgsProduct({{1000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
