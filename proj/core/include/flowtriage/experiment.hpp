#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowtriage/dataset.hpp"
#include "flowtriage/encoding.hpp"
#include "flowtriage/metrics.hpp"
#include "flowtriage/model_store.hpp"

namespace flowtriage::experiment {

struct ModelSpec {
    std::string name;   // report id; defaults to kind[-pooling]
    std::string kind;   // logistic | linear-svm | forest | ggnn | ggnn-fusion
    models::Pooling pooling = models::Pooling::avg;

    // shared trainer budget
    double learning_rate = 0.001;
    std::size_t epochs = 150;
    std::size_t batch_size = 64;

    // forest
    std::size_t n_trees = 100;
    int max_depth = -1;
    std::size_t min_leaf = 1;
    std::size_t feature_subsample = 11;

    // ggnn
    std::size_t hidden_dim = 128;
    std::size_t steps = 8;
    double weight_decay = 0.1;
    std::size_t patience = 20;
    std::string embeddings_path;  // ggnn-fusion only
};

struct ExperimentConfig {
    std::filesystem::path manifest_path;
    std::filesystem::path out_dir;
    std::vector<std::uint64_t> seeds{2025, 2026, 2027, 2028, 2029};
    std::uint64_t split_seed = 2025;
    dataset::SplitRatios ratios;
    std::vector<ModelSpec> models;
    std::size_t workers = 0;  // parallel (model, seed) jobs; 0 = min(4, hardware)
};

/// Declarative JSON config; see the README for the schema.
ExperimentConfig load_config(const std::filesystem::path& path);

struct SeedRun {
    std::uint64_t seed = 0;
    metrics::ConfusionCounts counts;
    metrics::Metric f1;
    metrics::Metric precision;
    metrics::Metric recall;
    metrics::Metric accuracy;
    double average_precision = 0.0;
};

struct ModelReport {
    std::string name;
    std::vector<SeedRun> runs;
};

struct ExperimentReport {
    std::vector<ModelReport> models;
    std::string vocabulary_id;
};

/// Train every configured model for every seed, evaluate on the test split,
/// persist models and the vocabulary, and write metrics.csv plus summary.md
/// under out_dir. Reports carry no timestamps, so identical configs reproduce
/// identical bytes.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct RankedRow {
    std::string package;
    double score = 0.0;
    bool verdict = false;
    std::string model_id;
    std::string sink_file;
    provenance::Position sink_position;
    std::optional<bool> label;
};

struct RankedReport {
    std::vector<RankedRow> rows;  // descending score, ties by ascending package
    bool has_labels = false;
    std::vector<std::pair<double, double>> top_n_precision;  // (fraction, precision)
};

/// Score and order a manifest subset with a stored model. The vocabulary must
/// be the one the model was trained against ("vocab-mismatch" otherwise).
RankedReport rank(const model_store::StoredModel& model, const encoding::OperationVocabulary& vocab,
                  const dataset::Manifest& manifest,
                  const std::vector<const dataset::ManifestRow*>& subset);

void write_ranked_csv(const RankedReport& report, const std::filesystem::path& path);

/// One row per model x seed; undefined metrics are left empty.
void write_metrics_csv(const ExperimentReport& report, const std::filesystem::path& path);

/// Markdown summary with mean, variance, and the 2.776 * SD confidence
/// half-width per metric (dash when a metric is undefined or n != 5).
void write_summary_markdown(const ExperimentReport& report, const std::filesystem::path& path);

}  // namespace flowtriage::experiment
