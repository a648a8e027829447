#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "flowtriage/encoding.hpp"
#include "flowtriage/provenance.hpp"
#include "flowtriage/synth.hpp"

using namespace flowtriage;

namespace {

std::vector<provenance::ProvenanceGraph> raw_graphs(std::size_t n) {
    synth::SynthProfile profile;
    profile.min_nodes = 4;
    profile.max_nodes = 10;
    std::vector<provenance::ProvenanceGraph> graphs;
    for (std::size_t i = 0; i < n; ++i) {
        graphs.push_back(synth::generate_package(i, profile, i % 3 != 0).graph);
    }
    return graphs;
}

void BM_ParseGraph(benchmark::State& state) {
    const auto raw = provenance::serialize_graph(raw_graphs(1).front());
    for (auto _ : state) {
        benchmark::DoNotOptimize(provenance::parse_graph(raw));
    }
}
BENCHMARK(BM_ParseGraph);

void BM_ValidateGraph(benchmark::State& state) {
    const auto graphs = raw_graphs(64);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(provenance::validate(graphs[i++ % graphs.size()]));
    }
}
BENCHMARK(BM_ValidateGraph);

void BM_BuildVocabulary(benchmark::State& state) {
    const auto graphs = raw_graphs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(encoding::build_vocabulary(graphs, "bench"));
    }
}
BENCHMARK(BM_BuildVocabulary)->Arg(64)->Arg(512);

void BM_EncodeGraph(benchmark::State& state) {
    const auto graphs = raw_graphs(64);
    const auto vocab = encoding::build_vocabulary(graphs, "bench");
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encoding::encode_graph(graphs[i++ % graphs.size()], vocab));
    }
}
BENCHMARK(BM_EncodeGraph);

}  // namespace
