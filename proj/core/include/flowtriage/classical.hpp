#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowtriage/encoding.hpp"

namespace flowtriage::models {

enum class Pooling { avg, max };

std::string_view to_string(Pooling p);
Pooling pooling_from_string(std::string_view s);

struct GraphVector {
    std::vector<double> values;  // encoding::kFeatureWidth wide
    Pooling pooling = Pooling::avg;
};

/// Collapse node features to a single graph vector; edges are ignored.
GraphVector pool(const encoding::EncodedGraph& eg, Pooling method);

struct LabeledVector {
    GraphVector x;
    bool label = false;
};

enum class LinearKind { logistic, linear_svm };

std::string_view to_string(LinearKind k);

struct LinearModel {
    std::vector<double> weights;  // one per feature
    double bias = 0.0;
    LinearKind kind = LinearKind::logistic;
    double class_weight_neg = 1.0;
    double class_weight_pos = 1.0;
};

struct LinearConfig {
    LinearKind kind = LinearKind::logistic;
    double learning_rate = 0.001;
    std::size_t epochs = 150;
    std::size_t batch_size = 64;  // >= n falls back to full-batch descent
    std::uint64_t seed = 2025;
};

/// Mini-batch gradient descent on the class-weighted loss (cross-entropy for
/// logistic, hinge for the linear SVM). Class weight for label c is
/// total / (2 * count_c). Deterministic per seed; requires both labels.
LinearModel train_linear(const std::vector<LabeledVector>& train, const LinearConfig& cfg);

/// Mean class-weighted loss of the model over a set (for monotonicity checks).
double linear_loss(const LinearModel& m, const std::vector<LabeledVector>& data);

/// Analytic gradient of the weighted logistic loss at (weights, bias);
/// returned as d(loss)/d(weights) with the bias derivative appended.
std::vector<double> logistic_gradient(const LinearModel& m, const std::vector<LabeledVector>& data);

struct TreeNode {
    // split node when feature >= 0, leaf otherwise
    int feature = -1;
    double threshold = 0.0;
    int left = -1;   // indices into DecisionTree::nodes
    int right = -1;  // right branch taken when x[feature] > threshold
    double leaf_fraction = 0.0;  // positive fraction at a leaf
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const std::vector<double>& x) const;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_trees = 100;
    int max_depth = -1;  // negative = unlimited; 0 degenerates to the class prior
    std::size_t min_leaf = 1;
    std::size_t feature_subsample = 11;  // round(sqrt(111))
    std::uint64_t seed = 2025;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    int max_depth = -1;
    std::size_t min_leaf = 1;
    std::size_t feature_subsample = 11;
    bool bootstrap = true;
    std::uint64_t seed = 2025;
};

/// Random forest with Gini-impurity splits; tree t draws its randomness from
/// seed + t, so results are independent of training order. Requires both
/// labels.
ForestModel train_forest(const std::vector<LabeledVector>& train, const ForestConfig& cfg);

/// Score in [0, 1]: sigmoid of the margin for linear kinds, mean leaf
/// fraction for forests. Throws Error("width-mismatch") on wrong input width.
double predict_score(const LinearModel& m, const GraphVector& x);
double predict_score(const ForestModel& m, const GraphVector& x);

/// Class weights as used by every trainer: total / (2 * count_c).
std::pair<double, double> class_weights(std::size_t n_neg, std::size_t n_pos);

}  // namespace flowtriage::models
