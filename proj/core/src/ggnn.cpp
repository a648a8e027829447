#include "flowtriage/ggnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "flowtriage/autodiff.hpp"
#include "flowtriage/common.hpp"
#include "flowtriage/metrics.hpp"

namespace flowtriage::ggnn {

std::vector<std::pair<std::string, Matrix*>> GgnnParams::tensors() {
    return {
        {"msg_in", &msg_in},         {"msg_out", &msg_out},       {"msg_bias", &msg_bias},
        {"update_a", &update_a},     {"update_h", &update_h},     {"update_bias", &update_bias},
        {"reset_a", &reset_a},       {"reset_h", &reset_h},       {"reset_bias", &reset_bias},
        {"cand_a", &cand_a},         {"cand_h", &cand_h},         {"cand_bias", &cand_bias},
        {"gate_w", &gate_w},         {"gate_bias", &gate_bias},   {"out_w", &out_w},
        {"out_bias", &out_bias},     {"head_w", &head_w},         {"head_bias", &head_bias},
    };
}

std::vector<std::pair<std::string, const Matrix*>> GgnnParams::tensors() const {
    auto mutable_view = const_cast<GgnnParams*>(this)->tensors();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(mutable_view.size());
    for (auto& [name, m] : mutable_view) out.emplace_back(name, m);
    return out;
}

std::size_t GgnnParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : tensors()) n += static_cast<std::size_t>(m->size());
    return n;
}

GgnnParams init_params(const GgnnConfig& config) {
    GgnnParams p;
    p.config = config;
    const auto h = static_cast<Eigen::Index>(config.hidden_dim);
    const auto a = static_cast<Eigen::Index>(config.annotation_dim);
    const auto e = static_cast<Eigen::Index>(config.external_dim);

    std::mt19937_64 gen(config.seed);
    const auto uniform_init = [&gen](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(r, c) = (2.0 * rng::unit(gen) - 1.0) * scale;
            }
        }
        return m;
    };

    p.msg_in = uniform_init(h, h);
    p.msg_out = uniform_init(h, h);
    p.msg_bias = Matrix::Zero(1, h);
    p.update_a = uniform_init(h, h);
    p.update_h = uniform_init(h, h);
    p.update_bias = Matrix::Zero(1, h);
    p.reset_a = uniform_init(h, h);
    p.reset_h = uniform_init(h, h);
    p.reset_bias = Matrix::Zero(1, h);
    p.cand_a = uniform_init(h, h);
    p.cand_h = uniform_init(h, h);
    p.cand_bias = Matrix::Zero(1, h);
    p.gate_w = uniform_init(h + a, 1);
    p.gate_bias = Matrix::Zero(1, 1);
    p.out_w = uniform_init(h, h);
    p.out_bias = Matrix::Zero(1, h);
    p.head_w = uniform_init(h + e, 2);
    p.head_bias = Matrix::Zero(1, 2);
    return p;
}

namespace {

struct BatchItem {
    const encoding::EncodedGraph* graph;
    const std::vector<double>* external;
};

struct TapeForward {
    std::vector<ad::Var> params;  // same order as GgnnParams::tensors()
    ad::Var logits;               // one row per batch item
    ad::Var embeddings;           // one row per batch item, hidden wide
    ad::Var gates;                // one row per node (whole batch)
};

/// Build the forward computation for a batch of graphs as one disjoint union:
/// block placement keeps per-graph results identical to one-at-a-time
/// processing while the GEMMs run at useful sizes.
TapeForward build_forward(ad::Tape& tape, const GgnnParams& p, const std::vector<BatchItem>& batch) {
    const auto hidden = static_cast<Eigen::Index>(p.config.hidden_dim);
    const auto ann = static_cast<Eigen::Index>(p.config.annotation_dim);
    const auto ext_dim = static_cast<Eigen::Index>(p.config.external_dim);

    Eigen::Index total_nodes = 0;
    for (const auto& item : batch) {
        if (item.graph->node_features.empty())
            throw Error("empty-graph", "ggnn forward requires at least one node");
        total_nodes += static_cast<Eigen::Index>(item.graph->node_features.size());
    }

    Matrix annotations = Matrix::Zero(total_nodes, ann);
    Matrix h0 = Matrix::Zero(total_nodes, hidden);
    Matrix externals = Matrix::Zero(static_cast<Eigen::Index>(batch.size()), ext_dim);
    // sparse wiring: message routes per edge direction and node -> graph rows
    std::vector<std::pair<std::int32_t, std::int32_t>> in_routes, out_routes, pool_routes;

    const Eigen::Index copy_width = std::min(hidden, ann);
    Eigen::Index row0 = 0;
    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const auto& eg = *batch[bi].graph;
        const auto n = static_cast<Eigen::Index>(eg.node_features.size());
        for (Eigen::Index v = 0; v < n; ++v) {
            const auto& feats = eg.node_features[static_cast<std::size_t>(v)].features;
            if (static_cast<Eigen::Index>(feats.size()) != ann)
                throw Error("width-mismatch", "node annotation width does not match the model");
            for (Eigen::Index c = 0; c < ann; ++c) annotations(row0 + v, c) = feats[static_cast<std::size_t>(c)];
            // state starts as the annotation zero-padded (or truncated) to hidden_dim
            h0.row(row0 + v).head(copy_width) = annotations.row(row0 + v).head(copy_width);
            pool_routes.emplace_back(static_cast<std::int32_t>(row0 + v),
                                     static_cast<std::int32_t>(bi));
        }
        for (const auto& [src, dst] : eg.edges) {
            const auto s = static_cast<std::int32_t>(row0 + static_cast<Eigen::Index>(src));
            const auto d = static_cast<std::int32_t>(row0 + static_cast<Eigen::Index>(dst));
            in_routes.emplace_back(s, d);   // d aggregates W_in * h over predecessors
            out_routes.emplace_back(d, s);  // s aggregates W_out * h over successors
        }
        if (ext_dim > 0) {
            if (batch[bi].external == nullptr ||
                static_cast<Eigen::Index>(batch[bi].external->size()) != ext_dim)
                throw Error("width-mismatch", "external embedding width does not match the model");
            for (Eigen::Index c = 0; c < ext_dim; ++c)
                externals(static_cast<Eigen::Index>(bi), c) = (*batch[bi].external)[static_cast<std::size_t>(c)];
        }
        row0 += n;
    }

    TapeForward fwd;
    auto tensors = const_cast<GgnnParams&>(p).tensors();
    fwd.params.reserve(tensors.size());
    for (auto& [name, m] : tensors) fwd.params.push_back(tape.input(*m));
    const ad::Var v_msg_in = fwd.params[0], v_msg_out = fwd.params[1], v_msg_bias = fwd.params[2];
    const ad::Var v_update_a = fwd.params[3], v_update_h = fwd.params[4], v_update_bias = fwd.params[5];
    const ad::Var v_reset_a = fwd.params[6], v_reset_h = fwd.params[7], v_reset_bias = fwd.params[8];
    const ad::Var v_cand_a = fwd.params[9], v_cand_h = fwd.params[10], v_cand_bias = fwd.params[11];
    const ad::Var v_gate_w = fwd.params[12], v_gate_bias = fwd.params[13];
    const ad::Var v_out_w = fwd.params[14], v_out_bias = fwd.params[15];
    const ad::Var v_head_w = fwd.params[16], v_head_bias = fwd.params[17];

    const ad::Var x = tape.constant(std::move(annotations));

    ad::Var h = tape.constant(std::move(h0));
    for (std::size_t step = 0; step < p.config.steps; ++step) {
        const ad::Var messages = tape.add_rowwise(
            tape.add(tape.scatter_add(tape.matmul(h, v_msg_in), in_routes, total_nodes),
                     tape.scatter_add(tape.matmul(h, v_msg_out), out_routes, total_nodes)),
            v_msg_bias);
        const ad::Var z = tape.sigmoid(tape.add_rowwise(
            tape.add(tape.matmul(messages, v_update_a), tape.matmul(h, v_update_h)), v_update_bias));
        const ad::Var r = tape.sigmoid(tape.add_rowwise(
            tape.add(tape.matmul(messages, v_reset_a), tape.matmul(h, v_reset_h)), v_reset_bias));
        const ad::Var candidate = tape.tanh(tape.add_rowwise(
            tape.add(tape.matmul(messages, v_cand_a), tape.matmul(tape.hadamard(r, h), v_cand_h)),
            v_cand_bias));
        h = tape.add(tape.hadamard(tape.one_minus(z), h), tape.hadamard(z, candidate));
    }

    // global attention pooling: sum_v sigmoid(gate([h_v | x_v])) * tanh(out(h_v))
    fwd.gates = tape.sigmoid(
        tape.add_rowwise(tape.matmul(tape.hconcat(h, x), v_gate_w), v_gate_bias));
    const ad::Var transformed = tape.tanh(tape.add_rowwise(tape.matmul(h, v_out_w), v_out_bias));
    fwd.embeddings = tape.scatter_add(tape.scale_rows(transformed, fwd.gates), pool_routes,
                                      static_cast<Eigen::Index>(batch.size()));

    ad::Var head_in = fwd.embeddings;
    if (ext_dim > 0) head_in = tape.hconcat(head_in, tape.constant(std::move(externals)));
    fwd.logits = tape.add_rowwise(tape.matmul(head_in, v_head_w), v_head_bias);
    return fwd;
}

double score_from_logits(double benign, double vulnerable) {
    // softmax probability of the vulnerable class
    const double zmax = std::max(benign, vulnerable);
    const double e0 = std::exp(benign - zmax);
    const double e1 = std::exp(vulnerable - zmax);
    return e1 / (e0 + e1);
}

}  // namespace

ForwardResult ggnn_forward(const encoding::EncodedGraph& eg, const GgnnParams& p,
                           const std::vector<double>* external) {
    ad::Tape tape;
    const std::vector<BatchItem> batch{{&eg, external}};
    const TapeForward fwd = build_forward(tape, p, batch);
    ForwardResult out;
    const Matrix& logits = tape.value(fwd.logits);
    out.logits = {logits(0, 0), logits(0, 1)};
    const Matrix& emb = tape.value(fwd.embeddings);
    out.embedding.assign(emb.data(), emb.data() + emb.size());
    const Matrix& gates = tape.value(fwd.gates);
    out.gates.assign(gates.data(), gates.data() + gates.size());
    out.score = score_from_logits(out.logits[0], out.logits[1]);
    return out;
}

std::vector<double> ggnn_scores(const std::vector<GraphRef>& items, const GgnnParams& p) {
    constexpr std::size_t kChunk = 64;  // bounds tape memory while keeping GEMMs batched
    std::vector<double> scores;
    scores.reserve(items.size());
    ad::Tape tape;
    for (std::size_t start = 0; start < items.size(); start += kChunk) {
        const std::size_t end = std::min(items.size(), start + kChunk);
        std::vector<BatchItem> batch;
        batch.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
            batch.push_back({items[i].graph, items[i].external});
        }
        tape.clear();
        const TapeForward fwd = build_forward(tape, p, batch);
        const Matrix& logits = tape.value(fwd.logits);
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            scores.push_back(score_from_logits(logits(r, 0), logits(r, 1)));
        }
    }
    return scores;
}

double loss(const std::array<double, 2>& logits, bool label, double class_weight) {
    const double zmax = std::max(logits[0], logits[1]);
    const double lse = zmax + std::log(std::exp(logits[0] - zmax) + std::exp(logits[1] - zmax));
    return class_weight * (lse - logits[label ? 1 : 0]);
}

std::array<double, 2> fuse_and_classify(const std::vector<double>& graph_embedding,
                                        const std::vector<double>& external_embedding,
                                        const Matrix& head_w, const Matrix& head_bias) {
    const auto total = static_cast<Eigen::Index>(graph_embedding.size() + external_embedding.size());
    if (head_w.rows() != total || head_w.cols() != 2)
        throw Error("width-mismatch",
                    "fusion head expects " + std::to_string(head_w.rows()) +
                        " inputs, got " + std::to_string(total));
    Eigen::RowVectorXd joint(total);
    for (std::size_t i = 0; i < graph_embedding.size(); ++i)
        joint(static_cast<Eigen::Index>(i)) = graph_embedding[i];
    for (std::size_t i = 0; i < external_embedding.size(); ++i)
        joint(static_cast<Eigen::Index>(graph_embedding.size() + i)) = external_embedding[i];
    const Eigen::RowVectorXd logits = joint * head_w + head_bias.row(0);
    return {logits(0), logits(1)};
}

namespace {

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    std::size_t step = 0;
};

void adam_update(GgnnParams& params, const std::vector<Matrix>& grads, AdamState& state,
                 const TrainConfig& cfg) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    auto tensors = params.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        Matrix& w = *tensors[t].second;
        state.m[t] = beta1 * state.m[t] + (1.0 - beta1) * grads[t];
        state.v[t] = beta2 * state.v[t].array().matrix() +
                     (1.0 - beta2) * grads[t].array().square().matrix();
        const Matrix m_hat = state.m[t] / bc1;
        const Matrix v_hat = state.v[t] / bc2;
        // decoupled weight decay
        w.array() -= cfg.learning_rate *
                     (m_hat.array() / (v_hat.array().sqrt() + eps) + cfg.weight_decay * w.array());
    }
}

double validation_f1(const GgnnParams& params, const std::vector<TrainExample>& val,
                     double threshold) {
    std::vector<GraphRef> refs;
    refs.reserve(val.size());
    for (const auto& ex : val) refs.push_back({ex.graph, ex.external});
    const std::vector<double> scores = ggnn_scores(refs, params);
    std::vector<bool> verdicts, labels;
    verdicts.reserve(val.size());
    labels.reserve(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) {
        verdicts.push_back(scores[i] >= threshold);
        labels.push_back(val[i].label);
    }
    const auto c = metrics::confusion(verdicts, labels);
    return metrics::f1(c).value_or(0.0);
}

}  // namespace

GgnnModel train_ggnn(const std::vector<TrainExample>& train, const std::vector<TrainExample>& val,
                     const GgnnConfig& arch, const TrainConfig& cfg) {
    if (train.empty()) throw Error("empty-input", "training set is empty");
    if (cfg.learning_rate <= 0.0 || cfg.max_epochs == 0)
        throw Error("bad-value", "learning rate and epoch budget must be positive");
    if (cfg.patience > cfg.max_epochs)
        throw Error("bad-value", "patience cannot exceed max_epochs");
    std::size_t n_pos = 0;
    for (const auto& ex : train) n_pos += ex.label ? 1 : 0;
    if (n_pos == 0 || n_pos == train.size())
        throw Error("single-class", "training set must contain both labels");

    const double total = static_cast<double>(train.size());
    const double w_neg = total / (2.0 * static_cast<double>(train.size() - n_pos));
    const double w_pos = total / (2.0 * static_cast<double>(n_pos));

    GgnnConfig config = arch;
    GgnnParams params = init_params(config);

    AdamState adam;
    for (const auto& [name, m] : params.tensors()) {
        adam.m.push_back(Matrix::Zero(m->rows(), m->cols()));
        adam.v.push_back(Matrix::Zero(m->rows(), m->cols()));
    }

    std::mt19937_64 gen(cfg.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    GgnnModel best;
    best.params = params;
    best.best_validation_f1 = -1.0;
    std::size_t epochs_since_best = 0;

    ad::Tape tape;
    const std::size_t batch_size = std::max<std::size_t>(1, cfg.batch_size);
    std::vector<Matrix> grads;
    for (const auto& [name, m] : params.tensors())
        grads.push_back(Matrix::Zero(m->rows(), m->cols()));

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng::shuffle(order, gen);
        for (std::size_t start = 0; start < train.size(); start += batch_size) {
            const std::size_t end = std::min(train.size(), start + batch_size);
            std::vector<BatchItem> batch;
            std::vector<std::size_t> classes;
            std::vector<double> weights;
            batch.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = train[order[k]];
                batch.push_back({ex.graph, ex.external});
                classes.push_back(ex.label ? 1 : 0);
                // mean weighted loss over the batch
                weights.push_back((ex.label ? w_pos : w_neg) / static_cast<double>(end - start));
            }
            tape.clear();
            const TapeForward fwd = build_forward(tape, params, batch);
            const ad::Var batch_loss = tape.softmax_cross_entropy(fwd.logits, classes, weights);
            tape.backward(batch_loss);
            for (std::size_t t = 0; t < fwd.params.size(); ++t) grads[t] = tape.grad(fwd.params[t]);
            adam_update(params, grads, adam, cfg);
        }

        const double f1 = validation_f1(params, val, 0.5);
        if (f1 > best.best_validation_f1) {
            best.best_validation_f1 = f1;
            best.best_epoch = epoch;
            best.params = params;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        best.epochs_run = epoch;
        if (epochs_since_best >= cfg.patience) break;
    }
    return best;
}

double grad_check(GgnnParams& p, const encoding::EncodedGraph& eg, bool label,
                  double class_weight) {
    const std::size_t true_class = label ? 1 : 0;

    ad::Tape tape;
    const std::vector<BatchItem> batch{{&eg, nullptr}};
    const TapeForward fwd = build_forward(tape, p, batch);
    const ad::Var loss_var =
        tape.softmax_cross_entropy(fwd.logits, {true_class}, {class_weight});
    tape.backward(loss_var);

    std::vector<Matrix> analytic;
    for (std::size_t t = 0; t < fwd.params.size(); ++t) analytic.push_back(tape.grad(fwd.params[t]));

    const auto loss_at = [&]() {
        ad::Tape local;
        const TapeForward f = build_forward(local, p, batch);
        const ad::Var l = local.softmax_cross_entropy(f.logits, {true_class}, {class_weight});
        return local.value(l)(0, 0);
    };

    constexpr double step = 1e-4;
    double max_err = 0.0;
    auto tensors = p.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        Matrix& w = *tensors[t].second;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double saved = w.data()[i];
            w.data()[i] = saved + step;
            const double up = loss_at();
            w.data()[i] = saved - step;
            const double down = loss_at();
            w.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[t].data()[i];
            const double err = std::abs(a - numeric) /
                               std::max({1.0, std::abs(a), std::abs(numeric)});
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace flowtriage::ggnn
