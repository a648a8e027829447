#pragma once

#include <random>
#include <string>

#include "flowtriage/encoding.hpp"
#include "flowtriage/provenance.hpp"

namespace fixtures {

/// The four-node toy flow: an untainted "grep " literal and a tainted call
/// argument concatenated into a tainted exec sink.
inline std::string toygrep_json() {
    return R"({
      "package": "toygrep",
      "vuln_type": "ACI",
      "label": true,
      "nodes": [
        {"id": 0, "operation": "Untainted", "value": "[String: 'grep ']", "file": "index.js",
         "pos": [2, 4, 2, 19], "tainted": false, "flows_from": [], "sink": null},
        {"id": 1, "operation": "call:grep", "value": "tainted", "file": "index.js",
         "pos": [1, 0, 3, 1], "tainted": true, "flows_from": [], "sink": null},
        {"id": 2, "operation": "string.concat", "value": "grep tainted", "file": "index.js",
         "pos": [2, 9, 2, 28], "tainted": true, "flows_from": [1, 0], "sink": null},
        {"id": 3, "operation": "call:exec", "value": "grep tainted", "file": "index.js",
         "pos": [2, 4, 2, 29], "tainted": true, "flows_from": [2], "sink": "exec"}
      ]
    })";
}

inline flowtriage::provenance::ProvenanceGraph toygrep_graph() {
    return flowtriage::provenance::parse_graph(toygrep_json());
}

/// Vocabulary covering the toygrep operations.
inline flowtriage::encoding::OperationVocabulary toygrep_vocabulary() {
    return flowtriage::encoding::build_vocabulary({toygrep_graph()}, "toygrep");
}

/// Random small encoded graph: a chain with a sink on the last node plus a few
/// extra random edges, random operation/tainted assignments.
inline flowtriage::encoding::EncodedGraph random_encoded_graph(std::mt19937_64& gen,
                                                               std::size_t min_nodes = 2,
                                                               std::size_t max_nodes = 6) {
    namespace prov = flowtriage::provenance;
    prov::ProvenanceGraph g;
    g.package_name = "random";
    g.vuln_type = gen() % 2 == 0 ? prov::VulnType::ace : prov::VulnType::aci;
    const std::size_t n = min_nodes + gen() % (max_nodes - min_nodes + 1);
    const char* ops[] = {"string.concat", "call:exec", "call:grep", "array.join", ""};
    for (std::size_t i = 0; i < n; ++i) {
        prov::ProvenanceNode node;
        node.id = static_cast<std::int64_t>(i);
        node.operation = ops[gen() % 5];
        node.tainted = static_cast<prov::Tainted>(gen() % 3);
        if (i > 0) node.flows_from.push_back(static_cast<std::int64_t>(i - 1));
        if (i > 1 && gen() % 3 == 0)
            node.flows_from.push_back(static_cast<std::int64_t>(gen() % (i - 1)));
        if (i + 1 == n) node.sink_type = static_cast<prov::SinkType>(gen() % 4);
        g.nodes.push_back(std::move(node));
    }
    std::vector<prov::ProvenanceGraph> corpus{g};
    const auto vocab = flowtriage::encoding::build_vocabulary(corpus, "random");
    return flowtriage::encoding::encode_graph(g, vocab);
}

}  // namespace fixtures
