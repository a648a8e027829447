#include "flowtriage/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "flowtriage/common.hpp"

namespace flowtriage::models {

std::string_view to_string(Pooling p) { return p == Pooling::avg ? "avg" : "max"; }

Pooling pooling_from_string(std::string_view s) {
    if (s == "avg") return Pooling::avg;
    if (s == "max") return Pooling::max;
    throw Error("bad-value", "unknown pooling method '" + std::string(s) + "'");
}

std::string_view to_string(LinearKind k) {
    return k == LinearKind::logistic ? "logistic" : "linear-svm";
}

GraphVector pool(const encoding::EncodedGraph& eg, Pooling method) {
    if (eg.node_features.empty())
        throw Error("empty-graph", "cannot pool a graph with no nodes");
    GraphVector out;
    out.pooling = method;
    out.values.assign(encoding::kFeatureWidth, 0.0);
    for (const auto& node : eg.node_features) {
        for (std::size_t i = 0; i < encoding::kFeatureWidth; ++i) {
            if (method == Pooling::avg) {
                out.values[i] += node.features[i];
            } else {
                out.values[i] = std::max(out.values[i], node.features[i]);
            }
        }
    }
    if (method == Pooling::avg) {
        const double n = static_cast<double>(eg.node_features.size());
        for (double& v : out.values) v /= n;
    }
    return out;
}

std::pair<double, double> class_weights(std::size_t n_neg, std::size_t n_pos) {
    const double total = static_cast<double>(n_neg + n_pos);
    return {total / (2.0 * static_cast<double>(n_neg)),
            total / (2.0 * static_cast<double>(n_pos))};
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double margin(const LinearModel& m, const std::vector<double>& x) {
    double z = m.bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += m.weights[i] * x[i];
    return z;
}

void check_both_classes(const std::vector<LabeledVector>& train) {
    const bool any_pos = std::any_of(train.begin(), train.end(),
                                     [](const LabeledVector& v) { return v.label; });
    const bool any_neg = std::any_of(train.begin(), train.end(),
                                     [](const LabeledVector& v) { return !v.label; });
    if (!any_pos || !any_neg)
        throw Error("single-class", "training set must contain both labels");
}

}  // namespace

LinearModel train_linear(const std::vector<LabeledVector>& train, const LinearConfig& cfg) {
    check_both_classes(train);
    const std::size_t dim = train.front().x.values.size();

    std::size_t n_pos = 0;
    for (const auto& ex : train) n_pos += ex.label ? 1 : 0;
    const auto [w_neg, w_pos] = class_weights(train.size() - n_pos, n_pos);

    LinearModel m;
    m.kind = cfg.kind;
    m.class_weight_neg = w_neg;
    m.class_weight_pos = w_pos;
    m.weights.assign(dim, 0.0);
    m.bias = 0.0;

    std::mt19937_64 gen(cfg.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
    std::vector<double> grad(dim, 0.0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng::shuffle(order, gen);
        for (std::size_t start = 0; start < train.size(); start += batch) {
            const std::size_t end = std::min(train.size(), start + batch);
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_bias = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = train[order[k]];
                const double w = ex.label ? w_pos : w_neg;
                const double z = margin(m, ex.x.values);
                double dz = 0.0;
                if (cfg.kind == LinearKind::logistic) {
                    const double y = ex.label ? 1.0 : 0.0;
                    dz = w * (sigmoid(z) - y);
                } else {
                    const double t = ex.label ? 1.0 : -1.0;
                    if (t * z < 1.0) dz = -w * t;  // hinge subgradient
                }
                if (dz != 0.0) {
                    for (std::size_t i = 0; i < dim; ++i) grad[i] += dz * ex.x.values[i];
                    grad_bias += dz;
                }
            }
            const double scale = cfg.learning_rate / static_cast<double>(end - start);
            for (std::size_t i = 0; i < dim; ++i) m.weights[i] -= scale * grad[i];
            m.bias -= scale * grad_bias;
        }
    }
    return m;
}

double linear_loss(const LinearModel& m, const std::vector<LabeledVector>& data) {
    if (data.empty()) throw Error("empty-input", "loss of an empty set");
    double total = 0.0;
    for (const auto& ex : data) {
        const double w = ex.label ? m.class_weight_pos : m.class_weight_neg;
        const double z = margin(m, ex.x.values);
        if (m.kind == LinearKind::logistic) {
            // numerically stable weighted cross-entropy
            const double y = ex.label ? 1.0 : 0.0;
            total += w * (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))));
        } else {
            const double t = ex.label ? 1.0 : -1.0;
            total += w * std::max(0.0, 1.0 - t * z);
        }
    }
    return total / static_cast<double>(data.size());
}

std::vector<double> logistic_gradient(const LinearModel& m,
                                      const std::vector<LabeledVector>& data) {
    if (data.empty()) throw Error("empty-input", "gradient of an empty set");
    const std::size_t dim = m.weights.size();
    std::vector<double> grad(dim + 1, 0.0);
    for (const auto& ex : data) {
        const double w = ex.label ? m.class_weight_pos : m.class_weight_neg;
        const double y = ex.label ? 1.0 : 0.0;
        const double dz = w * (sigmoid(margin(m, ex.x.values)) - y);
        for (std::size_t i = 0; i < dim; ++i) grad[i] += dz * ex.x.values[i];
        grad[dim] += dz;
    }
    for (double& g : grad) g /= static_cast<double>(data.size());
    return grad;
}

double DecisionTree::predict(const std::vector<double>& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] > n.threshold ? n.right : n.left;
    }
    return nodes[static_cast<std::size_t>(i)].leaf_fraction;
}

namespace {

struct TreeBuilder {
    const std::vector<LabeledVector>& data;
    const ForestConfig& cfg;
    std::mt19937_64 gen;
    DecisionTree tree;

    std::size_t count_positives(const std::vector<std::size_t>& rows) const {
        std::size_t pos = 0;
        for (const std::size_t r : rows) pos += data[r].label ? 1 : 0;
        return pos;
    }

    static double gini(std::size_t pos, std::size_t total) {
        if (total == 0) return 0.0;
        const double p = static_cast<double>(pos) / static_cast<double>(total);
        return 2.0 * p * (1.0 - p);
    }

    /// Features considered at a split: a seeded draw without replacement,
    /// sorted ascending so the best-split scan order is deterministic.
    std::vector<std::size_t> sample_features(std::size_t dim) {
        const std::size_t k = std::min(std::max<std::size_t>(1, cfg.feature_subsample), dim);
        std::vector<std::size_t> all(dim);
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng::below(gen, dim - i));
            std::swap(all[i], all[j]);
        }
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

    int build(std::vector<std::size_t> rows, int depth) {
        const int index = static_cast<int>(tree.nodes.size());
        const std::size_t total_pos = count_positives(rows);
        tree.nodes.emplace_back();
        tree.nodes.back().leaf_fraction =
            static_cast<double>(total_pos) / static_cast<double>(rows.size());

        const bool pure = total_pos == 0 || total_pos == rows.size();
        const bool depth_exhausted = cfg.max_depth >= 0 && depth >= cfg.max_depth;
        if (pure || depth_exhausted || rows.size() < 2 * cfg.min_leaf) return index;

        // best Gini-gain split over the sampled features; first best wins
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        const double parent_impurity = gini(total_pos, rows.size());

        for (const std::size_t f : sample_features(data.front().x.values.size())) {
            std::vector<std::pair<double, bool>> column;
            column.reserve(rows.size());
            for (const std::size_t r : rows) column.emplace_back(data[r].x.values[f], data[r].label);
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                ++left_n;
                left_pos += column[i].second ? 1 : 0;
                if (column[i].first == column[i + 1].first) continue;  // no boundary here
                const std::size_t right_n = column.size() - left_n;
                if (left_n < cfg.min_leaf || right_n < cfg.min_leaf) continue;
                const std::size_t right_pos = total_pos - left_pos;
                const double child_impurity =
                    (static_cast<double>(left_n) * gini(left_pos, left_n) +
                     static_cast<double>(right_n) * gini(right_pos, right_n)) /
                    static_cast<double>(column.size());
                const double gain = parent_impurity - child_impurity;
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (column[i].first + column[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return index;  // no informative split among sampled features

        std::vector<std::size_t> left_rows, right_rows;
        for (const std::size_t r : rows) {
            (data[r].x.values[static_cast<std::size_t>(best_feature)] > best_threshold
                 ? right_rows
                 : left_rows)
                .push_back(r);
        }
        tree.nodes[static_cast<std::size_t>(index)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = best_threshold;
        const int left = build(std::move(left_rows), depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build(std::move(right_rows), depth + 1);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
};

}  // namespace

ForestModel train_forest(const std::vector<LabeledVector>& train, const ForestConfig& cfg) {
    check_both_classes(train);
    if (cfg.n_trees == 0) throw Error("bad-value", "n_trees must be positive");

    ForestModel model;
    model.n_trees = cfg.n_trees;
    model.max_depth = cfg.max_depth;
    model.min_leaf = cfg.min_leaf;
    model.feature_subsample = cfg.feature_subsample;
    model.seed = cfg.seed;
    model.trees.resize(cfg.n_trees);

    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        // per-tree stream: results do not depend on the loop order
        std::mt19937_64 gen(cfg.seed + t);
        std::vector<std::size_t> rows;
        rows.reserve(train.size());
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < train.size(); ++i) {
                rows.push_back(static_cast<std::size_t>(rng::below(gen, train.size())));
            }
        } else {
            rows.resize(train.size());
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder{train, cfg, std::move(gen), {}};
        builder.build(std::move(rows), 0);
        model.trees[t] = std::move(builder.tree);
    }
    return model;
}

double predict_score(const LinearModel& m, const GraphVector& x) {
    if (x.values.size() != m.weights.size())
        throw Error("width-mismatch", "input width " + std::to_string(x.values.size()) +
                                          " does not match model width " +
                                          std::to_string(m.weights.size()));
    return sigmoid(margin(m, x.values));
}

double predict_score(const ForestModel& m, const GraphVector& x) {
    if (m.trees.empty()) throw Error("bad-value", "forest has no trees");
    double sum = 0.0;
    for (const auto& tree : m.trees) sum += tree.predict(x.values);
    return sum / static_cast<double>(m.trees.size());
}

}  // namespace flowtriage::models
