#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "flowtriage/classical.hpp"
#include "flowtriage/ggnn.hpp"

using namespace flowtriage;

namespace {

void BM_PoolAvg(benchmark::State& state) {
    const auto& corpus = bench::encoded_corpus();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::pool(corpus[i++ % corpus.size()], models::Pooling::avg));
    }
}
BENCHMARK(BM_PoolAvg);

void BM_LinearScore(benchmark::State& state) {
    const auto& corpus = bench::encoded_corpus();
    models::LinearModel model;
    model.weights.assign(encoding::kFeatureWidth, 0.01);
    model.bias = -0.2;
    std::vector<models::GraphVector> pooled;
    for (const auto& eg : corpus) pooled.push_back(models::pool(eg, models::Pooling::max));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::predict_score(model, pooled[i++ % pooled.size()]));
    }
}
BENCHMARK(BM_LinearScore);

void BM_ForestTrain(benchmark::State& state) {
    const auto& corpus = bench::encoded_corpus();
    std::vector<models::LabeledVector> train;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        train.push_back({models::pool(corpus[i], models::Pooling::avg), i % 3 != 0});
    }
    models::ForestConfig cfg;
    cfg.n_trees = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(models::train_forest(train, cfg));
    }
}
BENCHMARK(BM_ForestTrain)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_GgnnForward(benchmark::State& state) {
    const auto& corpus = bench::encoded_corpus();
    ggnn::GgnnConfig config;
    config.hidden_dim = static_cast<std::size_t>(state.range(0));
    config.steps = 8;
    const auto params = ggnn::init_params(config);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ggnn::ggnn_forward(corpus[i++ % corpus.size()], params));
    }
}
BENCHMARK(BM_GgnnForward)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_GgnnTrainEpoch(benchmark::State& state) {
    const auto& corpus = bench::encoded_corpus();
    std::vector<ggnn::TrainExample> train, val;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const ggnn::TrainExample ex{&corpus[i], i % 3 != 0, nullptr};
        (i % 8 == 7 ? val : train).push_back(ex);
    }
    ggnn::GgnnConfig arch;
    arch.hidden_dim = 64;
    arch.steps = 4;
    ggnn::TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.patience = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ggnn::train_ggnn(train, val, arch, cfg));
    }
}
BENCHMARK(BM_GgnnTrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
