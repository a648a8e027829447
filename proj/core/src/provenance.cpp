#include "flowtriage/provenance.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "flowtriage/common.hpp"

namespace flowtriage::provenance {

using nlohmann::json;

std::string_view to_string(SinkType s) {
    switch (s) {
        case SinkType::spawn: return "spawn";
        case SinkType::exec: return "exec";
        case SinkType::function_ctor: return "Function";
        case SinkType::eval: return "eval";
    }
    return "";
}

std::string_view to_string(VulnType v) {
    return v == VulnType::ace ? "ACE" : "ACI";
}

std::optional<SinkType> sink_from_string(std::string_view s) {
    if (s == "spawn") return SinkType::spawn;
    if (s == "exec") return SinkType::exec;
    if (s == "Function") return SinkType::function_ctor;
    if (s == "eval") return SinkType::eval;
    return std::nullopt;
}

std::optional<VulnType> vuln_from_string(std::string_view s) {
    if (s == "ACE") return VulnType::ace;
    if (s == "ACI") return VulnType::aci;
    return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::no_sink: return "no-sink";
        case ViolationKind::cycle: return "cycle";
        case ViolationKind::dangling_edge: return "dangling-edge";
        case ViolationKind::invalid_position: return "invalid-position";
    }
    return "";
}

namespace {

ProvenanceNode parse_node(const json& j) {
    if (!j.is_object()) throw Error("bad-value", "node entry is not an object");
    if (!j.contains("id")) throw Error("missing-field", "node is missing required field 'id'");
    if (!j.contains("flows_from"))
        throw Error("missing-field", "node is missing required field 'flows_from'");

    ProvenanceNode n;
    if (!j["id"].is_number_integer())
        throw Error("bad-value", "node field 'id' must be an integer");
    n.id = j["id"].get<std::int64_t>();

    n.operation = j.value("operation", std::string{});
    n.value = j.value("value", std::string{});
    n.file_path = j.value("file", std::string{});

    if (j.contains("pos") && !j["pos"].is_null()) {
        const auto& pos = j["pos"];
        if (!pos.is_array() || pos.size() != 4)
            throw Error("bad-value", "node field 'pos' must be an array of four integers");
        n.position.start_line = pos[0].get<std::int64_t>();
        n.position.start_col = pos[1].get<std::int64_t>();
        n.position.end_line = pos[2].get<std::int64_t>();
        n.position.end_col = pos[3].get<std::int64_t>();
    }

    if (j.contains("tainted") && !j["tainted"].is_null()) {
        if (!j["tainted"].is_boolean())
            throw Error("bad-value", "node field 'tainted' must be true, false, or null");
        n.tainted = j["tainted"].get<bool>() ? Tainted::tainted : Tainted::untainted;
    }

    const auto& ff = j["flows_from"];
    if (!ff.is_array()) throw Error("bad-value", "node field 'flows_from' must be an array");
    for (const auto& e : ff) {
        if (!e.is_number_integer())
            throw Error("bad-value", "'flows_from' entries must be integers");
        n.flows_from.push_back(e.get<std::int64_t>());
    }

    if (j.contains("sink") && !j["sink"].is_null()) {
        if (!j["sink"].is_string())
            throw Error("bad-value", "node field 'sink' must be a string or null");
        const auto sink = sink_from_string(j["sink"].get<std::string>());
        if (!sink)
            throw Error("bad-value", "unknown sink type '" + j["sink"].get<std::string>() + "'");
        n.sink_type = *sink;
    }
    return n;
}

}  // namespace

ProvenanceGraph parse_graph(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw Error("malformed-json", e.what());
    }
    if (!j.is_object()) throw Error("malformed-json", "top-level value must be an object");

    for (const char* field : {"package", "vuln_type", "nodes"}) {
        if (!j.contains(field))
            throw Error("missing-field", std::string("missing required field '") + field + "'");
    }

    ProvenanceGraph g;
    if (!j["package"].is_string()) throw Error("bad-value", "'package' must be a string");
    g.package_name = j["package"].get<std::string>();

    if (!j["vuln_type"].is_string()) throw Error("bad-value", "'vuln_type' must be a string");
    const auto vt = vuln_from_string(j["vuln_type"].get<std::string>());
    if (!vt)
        throw Error("bad-value",
                    "'vuln_type' must be \"ACE\" or \"ACI\", got '" +
                        j["vuln_type"].get<std::string>() + "'");
    g.vuln_type = *vt;

    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_boolean()) throw Error("bad-value", "'label' must be a boolean");
        g.label = j["label"].get<bool>();
    }

    if (!j["nodes"].is_array()) throw Error("bad-value", "'nodes' must be an array");
    std::unordered_set<std::int64_t> seen;
    for (const auto& nj : j["nodes"]) {
        ProvenanceNode n = parse_node(nj);
        if (!seen.insert(n.id).second)
            throw Error("duplicate-node-id", "duplicate node id " + std::to_string(n.id));
        g.nodes.push_back(std::move(n));
    }
    for (const auto& n : g.nodes) {
        for (const std::int64_t src : n.flows_from) {
            if (!seen.contains(src))
                throw Error("dangling-edge", "node " + std::to_string(n.id) +
                                                 " flows from unknown node " + std::to_string(src));
        }
    }
    return g;
}

std::string serialize_graph(const ProvenanceGraph& g) {
    json j;
    j["package"] = g.package_name;
    j["vuln_type"] = std::string(to_string(g.vuln_type));
    if (g.label) j["label"] = *g.label;
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        json nj;
        nj["id"] = n.id;
        nj["operation"] = n.operation;
        nj["value"] = n.value;
        nj["file"] = n.file_path;
        nj["pos"] = {n.position.start_line, n.position.start_col, n.position.end_line,
                     n.position.end_col};
        if (n.tainted == Tainted::unknown) {
            nj["tainted"] = nullptr;
        } else {
            nj["tainted"] = n.tainted == Tainted::tainted;
        }
        nj["flows_from"] = n.flows_from;
        if (n.sink_type) {
            nj["sink"] = std::string(to_string(*n.sink_type));
        } else {
            nj["sink"] = nullptr;
        }
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    return j.dump(2);
}

std::optional<std::vector<std::int64_t>> topological_order(const ProvenanceGraph& g) {
    std::unordered_map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].id] = i;

    // indegree counts in the predecessor -> successor orientation
    std::vector<std::size_t> indegree(g.nodes.size(), 0);
    std::vector<std::vector<std::size_t>> successors(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (const std::int64_t src : g.nodes[i].flows_from) {
            const auto it = index.find(src);
            if (it == index.end()) return std::nullopt;  // dangling edge, no order
            successors[it->second].push_back(i);
            ++indegree[i];
        }
    }

    // seed queue in ascending id order so the result is deterministic
    std::vector<std::size_t> by_id(g.nodes.size());
    for (std::size_t i = 0; i < by_id.size(); ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return g.nodes[a].id < g.nodes[b].id; });

    std::deque<std::size_t> ready;
    for (const std::size_t i : by_id) {
        if (indegree[i] == 0) ready.push_back(i);
    }

    std::vector<std::int64_t> order;
    order.reserve(g.nodes.size());
    while (!ready.empty()) {
        const std::size_t i = ready.front();
        ready.pop_front();
        order.push_back(g.nodes[i].id);
        for (const std::size_t next : successors[i]) {
            if (--indegree[next] == 0) ready.push_back(next);
        }
    }
    if (order.size() != g.nodes.size()) return std::nullopt;
    return order;
}

ValidationReport validate(const ProvenanceGraph& g) {
    ValidationReport report;

    std::unordered_set<std::int64_t> ids;
    for (const auto& n : g.nodes) ids.insert(n.id);

    bool has_sink = false;
    bool dangling = false;
    for (const auto& n : g.nodes) {
        if (n.sink_type) has_sink = true;
        for (const std::int64_t src : n.flows_from) {
            if (!ids.contains(src)) {
                dangling = true;
                report.violations.push_back({ViolationKind::dangling_edge, n.id,
                                             "flows from unknown node " + std::to_string(src)});
            }
        }
        const auto& p = n.position;
        if (p.start_line < 0 || p.start_col < 0 || p.end_line < 0 || p.end_col < 0 ||
            p.start_line > p.end_line) {
            report.violations.push_back(
                {ViolationKind::invalid_position, n.id, "position is negative or inverted"});
        }
    }

    if (!has_sink) {
        report.violations.push_back({ViolationKind::no_sink, std::nullopt, "graph has no sink node"});
    }
    if (!dangling && !topological_order(g)) {
        report.violations.push_back(
            {ViolationKind::cycle, std::nullopt, "flows_from relation contains a cycle"});
    }
    return report;
}

std::vector<ProvenanceNode> sink_nodes(const ProvenanceGraph& g) {
    std::vector<ProvenanceNode> sinks;
    for (const auto& n : g.nodes) {
        if (n.sink_type) sinks.push_back(n);
    }
    if (sinks.empty())
        throw Error("no-sink", "sink_nodes called on a graph without sinks; validate first");
    std::sort(sinks.begin(), sinks.end(),
              [](const ProvenanceNode& a, const ProvenanceNode& b) { return a.id < b.id; });
    return sinks;
}

}  // namespace flowtriage::provenance
