#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowtriage/provenance.hpp"

namespace flowtriage::encoding {

// Node feature layout: four one-hot blocks concatenated.
//   [0..101]   operation category (0-99 vocabulary, 100 rare, 101 empty/missing)
//   [102..104] tainted status      (0 untainted, 1 tainted, 2 missing)
//   [105..108] sink type           (0 spawn, 1 exec, 2 Function, 3 eval); all
//              zeros on non-sink nodes
//   [109..110] vulnerability type  (0 ACE, 1 ACI), broadcast graph-wide
inline constexpr std::size_t kOperationSlots = 102;
inline constexpr std::size_t kTaintedSlots = 3;
inline constexpr std::size_t kSinkSlots = 4;
inline constexpr std::size_t kVulnSlots = 2;
inline constexpr std::size_t kFeatureWidth =
    kOperationSlots + kTaintedSlots + kSinkSlots + kVulnSlots;  // 111

inline constexpr std::size_t kTaintedOffset = kOperationSlots;
inline constexpr std::size_t kSinkOffset = kTaintedOffset + kTaintedSlots;
inline constexpr std::size_t kVulnOffset = kSinkOffset + kSinkSlots;

inline constexpr std::size_t kRareOperationIndex = 100;
inline constexpr std::size_t kMissingOperationIndex = 101;
inline constexpr std::size_t kMaxVocabularySize = 100;

struct VocabularyEntry {
    std::string op;
    std::size_t index = 0;
    std::uint64_t count = 0;
};

/// The operation -> category mapping learned from a training corpus: the
/// most frequent operation labels, capped at 100, most frequent first.
class OperationVocabulary {
public:
    OperationVocabulary() = default;
    OperationVocabulary(std::vector<VocabularyEntry> entries, std::string built_from);

    /// Category index for an operation label: vocabulary index, 100 when the
    /// label is unknown, 101 when it is empty.
    std::size_t category(const std::string& op) const;

    const std::vector<VocabularyEntry>& entries() const { return entries_; }
    const std::string& built_from() const { return built_from_; }

    std::string to_json() const;
    static OperationVocabulary from_json(std::string_view raw);

private:
    std::vector<VocabularyEntry> entries_;
    std::map<std::string, std::size_t> index_;
    std::string built_from_;
};

struct EncodedNode {
    std::vector<double> features;  // kFeatureWidth binary values
};

struct EncodedGraph {
    std::string package_name;
    std::vector<EncodedNode> node_features;                       // node-id order
    std::vector<std::pair<std::size_t, std::size_t>> edges;      // src -> dst indices
    std::optional<bool> label;
};

/// Count operation labels across a training corpus (per-node occurrences) and
/// keep the min(100, distinct) most frequent; ties break toward the
/// lexicographically smaller label. Throws Error("empty-corpus") when the
/// corpus has no graphs.
OperationVocabulary build_vocabulary(const std::vector<provenance::ProvenanceGraph>& corpus,
                                     const std::string& corpus_id = "");

/// One-hot encode a single node under a graph-level vulnerability type.
EncodedNode encode_node(const provenance::ProvenanceNode& n, const OperationVocabulary& v,
                        provenance::VulnType vuln_type);

/// Encode a validated graph: nodes in ascending id order, edges oriented
/// predecessor -> successor, vulnerability type broadcast into every node.
/// Throws Error("invalid-graph") when validation rejects the graph.
EncodedGraph encode_graph(const provenance::ProvenanceGraph& g, const OperationVocabulary& v);

}  // namespace flowtriage::encoding
