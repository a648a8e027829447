#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "flowtriage/classical.hpp"
#include "flowtriage/encoding.hpp"
#include "flowtriage/ggnn.hpp"

namespace flowtriage::model_store {

inline constexpr int kFormatVersion = 1;

/// Persisted parameters of any trained classifier, plus the metadata needed
/// to apply it: pooling method, decision threshold, and the id of the
/// vocabulary it was encoded against.
struct StoredModel {
    std::string kind;  // "logistic" | "linear-svm" | "forest" | "ggnn"
    std::string vocabulary_id;
    models::Pooling pooling = models::Pooling::avg;  // classical kinds only
    double threshold = 0.5;
    std::uint64_t seed = 0;

    std::optional<models::LinearModel> linear;
    std::optional<models::ForestModel> forest;
    std::optional<ggnn::GgnnParams> ggnn_params;
};

/// Versioned JSON with an FNV-1a payload checksum. Loading refuses version
/// mismatches ("version-mismatch") and corrupted or truncated files
/// ("checksum-mismatch" / "malformed-json").
void persist_model(const StoredModel& m, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

/// Score one encoded graph with whatever the stored model is.
double score(const StoredModel& m, const encoding::EncodedGraph& eg,
             const std::vector<double>* external = nullptr);

/// External embeddings for fusion: JSON with a declared width and a
/// package -> vector map.
struct EmbeddingFile {
    std::size_t width = 0;
    std::map<std::string, std::vector<double>> embeddings;
};

EmbeddingFile load_embeddings(const std::filesystem::path& path);

}  // namespace flowtriage::model_store
