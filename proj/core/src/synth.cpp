#include "flowtriage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <unordered_map>

#include "flowtriage/common.hpp"

namespace flowtriage::synth {

using provenance::ProvenanceGraph;
using provenance::ProvenanceNode;
using provenance::SinkType;
using provenance::Tainted;
using provenance::VulnType;

std::string_view to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::separable: return "separable";
        case ProfileKind::noisy: return "noisy";
        case ProfileKind::spawn_benign: return "spawn-benign";
    }
    return "";
}

ProfileKind profile_from_string(std::string_view s) {
    if (s == "separable") return ProfileKind::separable;
    if (s == "noisy") return ProfileKind::noisy;
    if (s == "spawn-benign") return ProfileKind::spawn_benign;
    throw Error("bad-value", "unknown synth profile '" + std::string(s) + "'");
}

namespace {

const std::vector<std::string>& source_ops() {
    static const std::vector<std::string> ops{"call:grep", "call:run", "call:render",
                                              "call:lookup", "call:format"};
    return ops;
}

const std::vector<std::string>& chain_ops() {
    static const std::vector<std::string> ops{
        "string.concat", "string.replace",     "string.slice", "string.trim",
        "array.join",    "string.toLowerCase", "string.split"};
    return ops;
}

const std::vector<std::string>& filler_lines() {
    static const std::vector<std::string> lines{
        "const util = require(\"util\");",
        "const path = require(\"path\");",
        "let cache = {};",
        "// helper wiring below",
        "const DEFAULTS = { strict: true };",
        "function noop() {}",
    };
    return lines;
}

std::string pick(const std::vector<std::string>& pool, std::mt19937_64& gen) {
    return pool[static_cast<std::size_t>(rng::below(gen, pool.size()))];
}

}  // namespace

bool tainted_edge_into_sink(const ProvenanceGraph& g) {
    std::unordered_map<std::int64_t, const ProvenanceNode*> by_id;
    for (const auto& n : g.nodes) by_id[n.id] = &n;
    for (const auto& n : g.nodes) {
        if (!n.sink_type) continue;
        if (*n.sink_type != SinkType::exec && *n.sink_type != SinkType::eval) continue;
        for (const std::int64_t src : n.flows_from) {
            const auto it = by_id.find(src);
            if (it != by_id.end() && it->second->tainted == Tainted::tainted) return true;
        }
    }
    return false;
}

SynthPackage generate_package(std::uint64_t seed, const SynthProfile& profile, bool vulnerable) {
    if (profile.min_nodes < 2 || profile.max_nodes < profile.min_nodes)
        throw Error("bad-value", "node count range must satisfy 2 <= min <= max");

    std::mt19937_64 gen(seed);
    const std::size_t n_nodes =
        profile.min_nodes +
        static_cast<std::size_t>(rng::below(gen, profile.max_nodes - profile.min_nodes + 1));

    // benign flavor: spawn sink with a live taint chain, or a fully untainted
    // chain into a code/command sink
    bool spawn_sink = false;
    if (!vulnerable && profile.kind == ProfileKind::spawn_benign) {
        spawn_sink = rng::unit(gen) < 0.95;
    }
    const bool chain_tainted = vulnerable || spawn_sink;

    SinkType sink;
    if (spawn_sink) {
        sink = SinkType::spawn;
    } else {
        sink = rng::unit(gen) < 0.5 ? SinkType::exec : SinkType::eval;
    }
    const VulnType vuln_type =
        (sink == SinkType::eval || sink == SinkType::function_ctor) ? VulnType::ace : VulnType::aci;

    const bool with_literal = n_nodes >= 3;
    const std::size_t n_chain = n_nodes - 2 - (with_literal ? 1 : 0);

    const std::string source_op = pick(source_ops(), gen);
    const std::string api_name = source_op.substr(source_op.find(':') + 1);
    const std::string sink_fn = sink == SinkType::spawn ? "spawn"
                                : sink == SinkType::exec ? "exec"
                                                         : "eval";

    // companion source file; the sink call position is recorded on the node
    std::vector<std::string> lines;
    lines.push_back("\"use strict\";");
    const std::size_t top_fillers = static_cast<std::size_t>(rng::below(gen, 4));
    for (std::size_t i = 0; i < top_fillers; ++i) lines.push_back(pick(filler_lines(), gen));
    lines.push_back("function " + api_name + "(input) {");
    std::string arg = "input";
    for (std::size_t i = 0; i < n_chain; ++i) {
        const std::string var = "step" + std::to_string(i);
        lines.push_back("  const " + var + " = " + arg + " + \" \";");
        arg = var;
    }
    const std::string sink_stmt = "  " + sink_fn + "(" + arg + ");";
    lines.push_back(sink_stmt);
    const auto sink_line = static_cast<std::int64_t>(lines.size());  // 1-based
    lines.push_back("}");
    lines.push_back("module.exports = { " + api_name + ": " + api_name + " };");

    std::string source;
    for (const auto& l : lines) {
        source += l;
        source += '\n';
    }

    SynthPackage pkg;
    pkg.graph.vuln_type = vuln_type;

    std::int64_t next_id = 0;
    const auto add_node = [&](std::string op, std::string value, Tainted tainted,
                              std::vector<std::int64_t> preds,
                              std::optional<SinkType> sink_type = std::nullopt,
                              std::int64_t line = 1) {
        ProvenanceNode n;
        n.id = next_id++;
        n.operation = std::move(op);
        n.value = std::move(value);
        n.file_path = pkg.source_file;
        n.position = {line, 2, line, static_cast<std::int64_t>(32)};
        n.tainted = tainted;
        n.flows_from = std::move(preds);
        n.sink_type = sink_type;
        pkg.graph.nodes.push_back(std::move(n));
        return pkg.graph.nodes.back().id;
    };

    const Tainted chain_status = chain_tainted ? Tainted::tainted : Tainted::untainted;

    std::optional<std::int64_t> literal_id;
    if (with_literal) {
        literal_id = add_node("Untainted", "[String: '" + api_name + " ']", Tainted::untainted, {});
    }
    std::int64_t prev = add_node(source_op, "attacker-input", chain_status, {});
    for (std::size_t i = 0; i < n_chain; ++i) {
        std::vector<std::int64_t> preds{prev};
        if (i == 0 && literal_id) preds.push_back(*literal_id);
        prev = add_node(pick(chain_ops(), gen), api_name + " attacker-input", chain_status,
                        std::move(preds));
    }
    add_node("call:" + sink_fn, api_name + " attacker-input", chain_status, {prev}, sink,
             sink_line);

    pkg.source = std::move(source);
    pkg.label = vulnerable;
    if (profile.kind == ProfileKind::noisy && rng::unit(gen) < profile.label_noise) {
        pkg.label = !pkg.label;
    }
    pkg.graph.label = pkg.label;
    return pkg;
}

std::vector<ManifestRow> generate_corpus(const SynthProfile& profile,
                                         const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "graphs", ec);
    std::filesystem::create_directories(out_dir / "sources", ec);
    if (ec) throw Error("io", "cannot create corpus directories under " + out_dir.string());

    // spread the vulnerable quota deterministically across indices
    const auto target = static_cast<std::size_t>(
        std::llround(profile.vuln_ratio * static_cast<double>(profile.n_packages)));
    std::vector<bool> vulnerable(profile.n_packages, false);
    for (std::size_t i = 0; i < target && i < vulnerable.size(); ++i) vulnerable[i] = true;
    std::mt19937_64 order_gen(profile.seed);
    rng::shuffle(vulnerable, order_gen);

    std::vector<ManifestRow> manifest;
    manifest.reserve(profile.n_packages);

    for (std::size_t i = 0; i < profile.n_packages; ++i) {
        const SynthPackage pkg = generate_package(profile.seed + 1 + i, profile, vulnerable[i]);
        std::ostringstream name;
        name << "pkg-" << to_string(profile.kind) << "-" << std::setw(5) << std::setfill('0') << i;
        const std::string package = name.str();

        const std::string graph_rel = "graphs/" + package + ".json";
        const std::string source_rel = "sources/" + package + "/" + pkg.source_file;

        provenance::ProvenanceGraph graph = pkg.graph;
        graph.package_name = package;

        std::ofstream gout(out_dir / graph_rel, std::ios::binary);
        if (!gout) throw Error("io", "cannot write " + (out_dir / graph_rel).string());
        gout << provenance::serialize_graph(graph) << '\n';

        std::filesystem::create_directories((out_dir / source_rel).parent_path());
        std::ofstream sout(out_dir / source_rel, std::ios::binary);
        if (!sout) throw Error("io", "cannot write " + (out_dir / source_rel).string());
        sout << pkg.source;

        manifest.push_back({package, graph_rel, source_rel,
                            std::string(provenance::to_string(graph.vuln_type)), pkg.label, ""});
    }

    std::ofstream mout(out_dir / "manifest.csv", std::ios::binary);
    if (!mout) throw Error("io", "cannot write manifest under " + out_dir.string());
    mout << "package,graph_path,source_path,vuln_type,label,split\n";
    for (const auto& row : manifest) {
        mout << row.package << ',' << row.graph_path << ',' << row.source_path << ','
             << row.vuln_type << ',' << (row.label ? '1' : '0') << ',' << row.split << '\n';
    }
    return manifest;
}

}  // namespace flowtriage::synth
