#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowtriage::provenance {

enum class Tainted { untainted, tainted, unknown };

/// Security-sensitive API kinds a flow can terminate in. Enumerator order is
/// load-bearing: it fixes the sink one-hot slot assignment downstream.
enum class SinkType { spawn = 0, exec = 1, function_ctor = 2, eval = 3 };

enum class VulnType { ace = 0, aci = 1 };

std::string_view to_string(SinkType s);
std::string_view to_string(VulnType v);
std::optional<SinkType> sink_from_string(std::string_view s);
std::optional<VulnType> vuln_from_string(std::string_view s);

struct Position {
    std::int64_t start_line = 0;
    std::int64_t start_col = 0;
    std::int64_t end_line = 0;
    std::int64_t end_col = 0;

    bool operator==(const Position&) const = default;
};

/// One taint-related operation or value recorded by the analysis tool.
struct ProvenanceNode {
    std::int64_t id = 0;
    std::string operation;               // empty = missing
    std::string value;                   // snapshot of the operation input
    std::string file_path;
    Position position;
    Tainted tainted = Tainted::unknown;
    std::vector<std::int64_t> flows_from;  // predecessor node ids
    std::optional<SinkType> sink_type;

    bool operator==(const ProvenanceNode&) const = default;
};

/// The taint history DAG for one reported flow.
struct ProvenanceGraph {
    std::string package_name;
    VulnType vuln_type = VulnType::aci;
    std::vector<ProvenanceNode> nodes;
    std::optional<bool> label;  // exploitable ground truth, when known

    bool operator==(const ProvenanceGraph&) const = default;
};

enum class ViolationKind { no_sink, cycle, dangling_edge, invalid_position };

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::optional<std::int64_t> node_id;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool accepted() const { return violations.empty(); }
};

/// Parse a provenance graph from its JSON wire form.
///
/// Required fields: top-level `package`, `vuln_type`, `nodes`; per node `id`
/// and `flows_from`. Unknown fields are ignored; missing optional fields map
/// to their sentinel (tainted=unknown, operation empty). Throws Error with
/// codes "malformed-json", "missing-field", "duplicate-node-id",
/// "dangling-edge", or "bad-value".
ProvenanceGraph parse_graph(std::string_view raw);

/// Serialize back to the wire form parse_graph accepts (round-trip stable).
std::string serialize_graph(const ProvenanceGraph& g);

/// Check the structural rules a graph must satisfy before encoding. Violations
/// are data, not failures; a graph is accepted iff the report is empty.
ValidationReport validate(const ProvenanceGraph& g);

/// Nodes carrying a sink type, ascending id. Throws Error("no-sink") when the
/// graph has none (callers must validate first).
std::vector<ProvenanceNode> sink_nodes(const ProvenanceGraph& g);

/// Kahn topological order over flows_from edges (predecessor before
/// successor), or nullopt when the edge relation has a cycle.
std::optional<std::vector<std::int64_t>> topological_order(const ProvenanceGraph& g);

}  // namespace flowtriage::provenance
