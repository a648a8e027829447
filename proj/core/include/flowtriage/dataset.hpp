#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowtriage/provenance.hpp"

namespace flowtriage::dataset {

struct ManifestRow {
    std::string package;
    std::string graph_path;   // relative to the manifest directory
    std::string source_path;  // relative to the manifest directory
    std::string vuln_type;
    std::optional<bool> label;
    std::string split;  // "", "train", "validate", or "test"
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<ManifestRow> rows;
};

Manifest load_manifest(const std::filesystem::path& csv_path);
void save_manifest(const Manifest& m, const std::filesystem::path& csv_path);

struct SplitRatios {
    unsigned train = 8;
    unsigned validate = 1;
    unsigned test = 1;
};

/// Seeded shuffle, then train and validate take their floor shares and test
/// absorbs the remainder: 1,883 rows always land as 1,506 / 188 / 189.
/// Requires at least 3 rows.
void split_dataset(Manifest& m, SplitRatios ratios, std::uint64_t seed);

std::vector<const ManifestRow*> rows_in_split(const Manifest& m, std::string_view split);

/// Read and parse the provenance graph behind one row.
provenance::ProvenanceGraph load_graph(const Manifest& m, const ManifestRow& row);

}  // namespace flowtriage::dataset
