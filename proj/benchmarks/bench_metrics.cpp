#include <benchmark/benchmark.h>

#include <random>

#include "flowtriage/common.hpp"
#include "flowtriage/metrics.hpp"

using namespace flowtriage;

namespace {

struct ScoreSet {
    std::vector<double> scores;
    std::vector<bool> labels;
};

ScoreSet random_scores(std::size_t n) {
    std::mt19937_64 gen(7);
    ScoreSet out;
    for (std::size_t i = 0; i < n; ++i) {
        out.scores.push_back(rng::unit(gen));
        out.labels.push_back(rng::unit(gen) < 0.65);
    }
    out.labels[0] = true;
    return out;
}

void BM_PrCurve(benchmark::State& state) {
    const auto set = random_scores(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::pr_curve(set.scores, set.labels));
    }
}
BENCHMARK(BM_PrCurve)->Arg(189)->Arg(1883)->Unit(benchmark::kMicrosecond);

void BM_InterpolatePr(benchmark::State& state) {
    std::vector<std::vector<metrics::PRPoint>> curves;
    for (int seed = 0; seed < 5; ++seed) {
        const auto set = random_scores(1883);
        curves.push_back(metrics::pr_curve(set.scores, set.labels));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::interpolate_pr(curves));
    }
}
BENCHMARK(BM_InterpolatePr)->Unit(benchmark::kMicrosecond);

void BM_TopNPrecision(benchmark::State& state) {
    const auto set = random_scores(1883);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::top_n_precision(set.scores, set.labels, 0.05));
    }
}
BENCHMARK(BM_TopNPrecision);

void BM_OperatingPoint(benchmark::State& state) {
    const auto set = random_scores(1883);
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::select_operating_point(
            set.scores, set.labels, {metrics::OperatingTarget::Kind::min_precision, 0.8}));
    }
}
BENCHMARK(BM_OperatingPoint)->Unit(benchmark::kMicrosecond);

}  // namespace
