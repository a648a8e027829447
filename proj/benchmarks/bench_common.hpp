#pragma once

#include <vector>

#include "flowtriage/encoding.hpp"
#include "flowtriage/synth.hpp"

namespace bench {

/// A reusable encoded corpus, generated once per binary run.
inline const std::vector<flowtriage::encoding::EncodedGraph>& encoded_corpus() {
    static const auto corpus = [] {
        flowtriage::synth::SynthProfile profile;
        profile.kind = flowtriage::synth::ProfileKind::separable;
        profile.min_nodes = 4;
        profile.max_nodes = 10;

        std::vector<flowtriage::provenance::ProvenanceGraph> graphs;
        for (std::size_t i = 0; i < 256; ++i) {
            auto pkg = flowtriage::synth::generate_package(1000 + i, profile, i % 3 != 0);
            pkg.graph.package_name = "bench-" + std::to_string(i);
            graphs.push_back(std::move(pkg.graph));
        }
        const auto vocab = flowtriage::encoding::build_vocabulary(graphs, "bench");
        std::vector<flowtriage::encoding::EncodedGraph> encoded;
        encoded.reserve(graphs.size());
        for (const auto& g : graphs) {
            encoded.push_back(flowtriage::encoding::encode_graph(g, vocab));
        }
        return encoded;
    }();
    return corpus;
}

}  // namespace bench
