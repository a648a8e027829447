#include "flowtriage/encoding.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "flowtriage/common.hpp"

namespace flowtriage::encoding {

using nlohmann::json;
using provenance::ProvenanceGraph;
using provenance::ProvenanceNode;
using provenance::Tainted;
using provenance::VulnType;

OperationVocabulary::OperationVocabulary(std::vector<VocabularyEntry> entries,
                                         std::string built_from)
    : entries_(std::move(entries)), built_from_(std::move(built_from)) {
    for (const auto& e : entries_) index_[e.op] = e.index;
}

std::size_t OperationVocabulary::category(const std::string& op) const {
    if (op.empty()) return kMissingOperationIndex;
    const auto it = index_.find(op);
    return it == index_.end() ? kRareOperationIndex : it->second;
}

std::string OperationVocabulary::to_json() const {
    json j;
    j["corpus"] = built_from_;
    json entries = json::array();
    for (const auto& e : entries_) {
        entries.push_back({{"op", e.op}, {"index", e.index}, {"count", e.count}});
    }
    j["entries"] = std::move(entries);
    return j.dump(2);
}

OperationVocabulary OperationVocabulary::from_json(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw Error("malformed-json", e.what());
    }
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
        throw Error("bad-value", "vocabulary file must contain an 'entries' array");
    std::vector<VocabularyEntry> entries;
    for (const auto& ej : j["entries"]) {
        entries.push_back({ej.at("op").get<std::string>(), ej.at("index").get<std::size_t>(),
                           ej.at("count").get<std::uint64_t>()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const VocabularyEntry& a, const VocabularyEntry& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].index != i)
            throw Error("bad-value", "vocabulary indices must form a bijection onto 0..len-1");
    }
    return OperationVocabulary(std::move(entries), j.value("corpus", std::string{}));
}

OperationVocabulary build_vocabulary(const std::vector<ProvenanceGraph>& corpus,
                                     const std::string& corpus_id) {
    if (corpus.empty()) throw Error("empty-corpus", "cannot build a vocabulary from no graphs");

    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& g : corpus) {
        for (const auto& n : g.nodes) {
            if (!n.operation.empty()) ++counts[n.operation];
        }
    }

    std::vector<VocabularyEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [op, count] : counts) entries.push_back({op, 0, count});
    std::sort(entries.begin(), entries.end(), [](const VocabularyEntry& a, const VocabularyEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.op < b.op;
    });
    if (entries.size() > kMaxVocabularySize) entries.resize(kMaxVocabularySize);
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].index = i;
    return OperationVocabulary(std::move(entries), corpus_id);
}

EncodedNode encode_node(const ProvenanceNode& n, const OperationVocabulary& v, VulnType vuln_type) {
    EncodedNode out;
    out.features.assign(kFeatureWidth, 0.0);

    out.features[v.category(n.operation)] = 1.0;

    const std::size_t tainted_slot = n.tainted == Tainted::untainted ? 0
                                     : n.tainted == Tainted::tainted ? 1
                                                                     : 2;
    out.features[kTaintedOffset + tainted_slot] = 1.0;

    if (n.sink_type) {
        out.features[kSinkOffset + static_cast<std::size_t>(*n.sink_type)] = 1.0;
    }

    out.features[kVulnOffset + static_cast<std::size_t>(vuln_type)] = 1.0;
    return out;
}

EncodedGraph encode_graph(const ProvenanceGraph& g, const OperationVocabulary& v) {
    const auto report = provenance::validate(g);
    if (!report.accepted()) {
        throw Error("invalid-graph", "cannot encode '" + g.package_name + "': " +
                                         std::string(provenance::to_string(
                                             report.violations.front().kind)));
    }

    // ascending id order fixes both feature row order and edge indices
    std::vector<std::size_t> order(g.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return g.nodes[a].id < g.nodes[b].id; });

    std::unordered_map<std::int64_t, std::size_t> row_of;
    for (std::size_t row = 0; row < order.size(); ++row) row_of[g.nodes[order[row]].id] = row;

    EncodedGraph out;
    out.package_name = g.package_name;
    out.label = g.label;
    out.node_features.reserve(g.nodes.size());
    for (const std::size_t i : order) {
        out.node_features.push_back(encode_node(g.nodes[i], v, g.vuln_type));
    }
    for (const std::size_t i : order) {
        const auto& n = g.nodes[i];
        for (const std::int64_t src : n.flows_from) {
            out.edges.emplace_back(row_of.at(src), row_of.at(n.id));
        }
    }
    return out;
}

}  // namespace flowtriage::encoding
