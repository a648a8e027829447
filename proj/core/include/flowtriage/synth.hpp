#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowtriage/provenance.hpp"

namespace flowtriage::synth {

enum class ProfileKind { separable, noisy, spawn_benign };

std::string_view to_string(ProfileKind k);
ProfileKind profile_from_string(std::string_view s);

struct SynthProfile {
    ProfileKind kind = ProfileKind::separable;
    std::size_t n_packages = 1250;
    double vuln_ratio = 0.657;          // mirrors the 989/1506 training imbalance
    std::size_t min_nodes = 4;
    std::size_t max_nodes = 10;
    double label_noise = 0.15;          // noisy profile only
    std::uint64_t seed = 2025;
};

struct SynthPackage {
    provenance::ProvenanceGraph graph;
    std::string source;                 // companion file matching the sink position
    std::string source_file = "index.js";
    bool label = false;
};

/// One deterministic package: vulnerable graphs carry a tainted chain into an
/// exec/eval sink; benign graphs either keep the whole chain untainted or end
/// in a spawn sink (spawn-benign). The source file contains the sink call at
/// the position recorded on the sink node.
SynthPackage generate_package(std::uint64_t seed, const SynthProfile& profile, bool vulnerable);

struct ManifestRow {
    std::string package;
    std::string graph_path;
    std::string source_path;
    std::string vuln_type;
    bool label = false;
    std::string split;  // filled later by the dataset splitter
};

/// Whether a graph trips the separable ground-truth rule: some tainted node
/// flows directly into an exec or eval sink. On the separable profile this
/// reproduces the generated labels exactly.
bool tainted_edge_into_sink(const provenance::ProvenanceGraph& g);

/// Write n_packages graphs + sources + manifest.csv under out_dir. Class
/// balance lands within one package of vuln_ratio * n_packages. Per-package
/// seeds derive as seed + index.
std::vector<ManifestRow> generate_corpus(const SynthProfile& profile,
                                         const std::filesystem::path& out_dir);

}  // namespace flowtriage::synth
