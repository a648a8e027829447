#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowtriage/encoding.hpp"

namespace flowtriage::ggnn {

using Matrix = Eigen::MatrixXd;

struct GgnnConfig {
    std::size_t hidden_dim = 128;
    std::size_t steps = 8;
    std::size_t annotation_dim = encoding::kFeatureWidth;
    std::size_t external_dim = 0;  // width of fused external embeddings; 0 disables fusion
    std::uint64_t seed = 2025;
};

/// All learned tensors. Weights are stored input x output so a row-per-node
/// state matrix H applies as H * W.
struct GgnnParams {
    GgnnConfig config;

    Matrix msg_in;        // hidden x hidden, incoming-edge messages
    Matrix msg_out;       // hidden x hidden, outgoing-edge messages
    Matrix msg_bias;      // 1 x hidden
    Matrix update_a, update_h, update_bias;  // GRU update gate
    Matrix reset_a, reset_h, reset_bias;     // GRU reset gate
    Matrix cand_a, cand_h, cand_bias;        // GRU candidate state
    Matrix gate_w;        // (hidden + annotation) x 1, attention gate
    Matrix gate_bias;     // 1 x 1
    Matrix out_w;         // hidden x hidden, pooled-node transform
    Matrix out_bias;      // 1 x hidden
    Matrix head_w;        // (hidden + external) x 2
    Matrix head_bias;     // 1 x 2

    /// Stable enumeration of every tensor, for the optimizer, the gradient
    /// check, and serialization.
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;

    std::size_t parameter_count() const;
};

/// Seeded initialization: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights,
/// zero biases.
GgnnParams init_params(const GgnnConfig& config);

struct ForwardResult {
    std::array<double, 2> logits{};     // class 0 = benign, class 1 = vulnerable
    std::vector<double> embedding;      // pooled graph embedding (hidden wide)
    std::vector<double> gates;          // per-node attention gate, one per node
    double score = 0.0;                 // softmax probability of the vulnerable class
};

/// Deterministic forward pass over one encoded graph. When the model was
/// built with external_dim > 0, `external` must point at an embedding of that
/// width. Throws on empty graphs and width mismatches.
ForwardResult ggnn_forward(const encoding::EncodedGraph& eg, const GgnnParams& p,
                           const std::vector<double>* external = nullptr);

struct GraphRef {
    const encoding::EncodedGraph* graph = nullptr;
    const std::vector<double>* external = nullptr;
};

/// Vulnerable-class scores for many graphs, evaluated in bounded chunks so
/// the matrix work runs at batch sizes instead of per graph.
std::vector<double> ggnn_scores(const std::vector<GraphRef>& items, const GgnnParams& p);

/// Class-weighted negative log-softmax of the true class.
double loss(const std::array<double, 2>& logits, bool label, double class_weight);

/// Concatenate a graph embedding with an externally supplied embedding and
/// apply a linear head: logits = head_w^T [g; e] + head_bias.
std::array<double, 2> fuse_and_classify(const std::vector<double>& graph_embedding,
                                        const std::vector<double>& external_embedding,
                                        const Matrix& head_w, const Matrix& head_bias);

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 64;
    double weight_decay = 0.1;    // decoupled, applied at the optimizer step
    std::size_t max_epochs = 150;
    std::size_t patience = 20;    // epochs without validation-F1 improvement
    std::uint64_t seed = 2025;
};

struct TrainExample {
    const encoding::EncodedGraph* graph = nullptr;
    bool label = false;
    const std::vector<double>* external = nullptr;  // required iff fusion is on
};

struct GgnnModel {
    GgnnParams params;
    double threshold = 0.5;
    std::size_t best_epoch = 0;
    double best_validation_f1 = 0.0;
    std::size_t epochs_run = 0;
};

/// Mini-batch AdamW training with per-epoch validation F1 early stopping:
/// the parameters of the best epoch are returned, training stops after
/// `patience` epochs without improvement or at max_epochs. Deterministic per
/// seed. Requires both labels in the training set.
GgnnModel train_ggnn(const std::vector<TrainExample>& train,
                     const std::vector<TrainExample>& val, const GgnnConfig& arch,
                     const TrainConfig& cfg);

/// Max relative error between the analytic gradient of the loss and central
/// finite differences (step 1e-4) over every parameter. Errors below unit
/// scale are measured absolutely: err = |a - n| / max(1, |a|, |n|).
double grad_check(GgnnParams& p, const encoding::EncodedGraph& eg, bool label,
                  double class_weight = 1.0);

}  // namespace flowtriage::ggnn
