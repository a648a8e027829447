#include "flowtriage/dataset.hpp"

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "flowtriage/common.hpp"

namespace flowtriage::dataset {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

constexpr std::string_view kHeader = "package,graph_path,source_path,vuln_type,label,split";

}  // namespace

Manifest load_manifest(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("io", "cannot read manifest " + csv_path.string());

    Manifest m;
    m.base_dir = csv_path.has_parent_path() ? csv_path.parent_path() : ".";

    std::string line;
    if (!std::getline(in, line)) throw Error("bad-value", "manifest is empty");
    if (split_csv_line(line) != split_csv_line(std::string(kHeader)))
        throw Error("bad-value", "unexpected manifest header: " + line);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6)
            throw Error("bad-value", "manifest row has " + std::to_string(f.size()) +
                                         " fields, expected 6: " + line);
        ManifestRow row;
        row.package = f[0];
        row.graph_path = f[1];
        row.source_path = f[2];
        row.vuln_type = f[3];
        if (f[4] == "1" || f[4] == "true") {
            row.label = true;
        } else if (f[4] == "0" || f[4] == "false") {
            row.label = false;
        } else if (!f[4].empty()) {
            throw Error("bad-value", "manifest label must be 0/1/true/false or empty, got " + f[4]);
        }
        row.split = f[5];
        m.rows.push_back(std::move(row));
    }
    return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw Error("io", "cannot write manifest " + csv_path.string());
    out << kHeader << '\n';
    for (const auto& r : m.rows) {
        out << r.package << ',' << r.graph_path << ',' << r.source_path << ',' << r.vuln_type
            << ',' << (r.label ? (*r.label ? "1" : "0") : "") << ',' << r.split << '\n';
    }
}

void split_dataset(Manifest& m, SplitRatios ratios, std::uint64_t seed) {
    if (m.rows.size() < 3)
        throw Error("bad-value", "splitting requires at least 3 packages, got " +
                                     std::to_string(m.rows.size()));
    const unsigned total_ratio = ratios.train + ratios.validate + ratios.test;
    if (total_ratio == 0 || ratios.train == 0)
        throw Error("bad-value", "split ratios must be positive");

    std::vector<std::size_t> order(m.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(seed);
    rng::shuffle(order, gen);

    const std::size_t n = m.rows.size();
    const std::size_t n_train = n * ratios.train / total_ratio;
    const std::size_t n_val = n * ratios.validate / total_ratio;
    // test takes the remainder rows

    for (std::size_t k = 0; k < n; ++k) {
        ManifestRow& row = m.rows[order[k]];
        if (k < n_train) {
            row.split = "train";
        } else if (k < n_train + n_val) {
            row.split = "validate";
        } else {
            row.split = "test";
        }
    }
}

std::vector<const ManifestRow*> rows_in_split(const Manifest& m, std::string_view split) {
    std::vector<const ManifestRow*> out;
    for (const auto& r : m.rows) {
        if (r.split == split) out.push_back(&r);
    }
    return out;
}

provenance::ProvenanceGraph load_graph(const Manifest& m, const ManifestRow& row) {
    const std::filesystem::path path = m.base_dir / row.graph_path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read graph " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    provenance::ProvenanceGraph g = provenance::parse_graph(buffer.str());
    if (!row.package.empty() && g.package_name != row.package)
        throw Error("bad-value", "graph file " + path.string() + " names package '" +
                                     g.package_name + "' but the manifest says '" + row.package +
                                     "'");
    return g;
}

}  // namespace flowtriage::dataset
