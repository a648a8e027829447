#include "flowtriage/model_store.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flowtriage/common.hpp"

namespace flowtriage::model_store {

using nlohmann::json;

namespace {

json linear_to_json(const models::LinearModel& m) {
    return {{"weights", m.weights},
            {"bias", m.bias},
            {"kind", std::string(models::to_string(m.kind))},
            {"class_weight_neg", m.class_weight_neg},
            {"class_weight_pos", m.class_weight_pos}};
}

models::LinearModel linear_from_json(const json& j) {
    models::LinearModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.kind = j.at("kind").get<std::string>() == "logistic" ? models::LinearKind::logistic
                                                           : models::LinearKind::linear_svm;
    m.class_weight_neg = j.at("class_weight_neg").get<double>();
    m.class_weight_pos = j.at("class_weight_pos").get<double>();
    return m;
}

json forest_to_json(const models::ForestModel& m) {
    json trees = json::array();
    for (const auto& tree : m.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"leaf_fraction", n.leaf_fraction}});
        }
        trees.push_back(std::move(nodes));
    }
    return {{"trees", std::move(trees)},
            {"n_trees", m.n_trees},
            {"max_depth", m.max_depth},
            {"min_leaf", m.min_leaf},
            {"feature_subsample", m.feature_subsample},
            {"seed", m.seed}};
}

models::ForestModel forest_from_json(const json& j) {
    models::ForestModel m;
    m.n_trees = j.at("n_trees").get<std::size_t>();
    m.max_depth = j.at("max_depth").get<int>();
    m.min_leaf = j.at("min_leaf").get<std::size_t>();
    m.feature_subsample = j.at("feature_subsample").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& tj : j.at("trees")) {
        models::DecisionTree tree;
        for (const auto& nj : tj) {
            models::TreeNode n;
            n.feature = nj.at("feature").get<int>();
            n.threshold = nj.at("threshold").get<double>();
            n.left = nj.at("left").get<int>();
            n.right = nj.at("right").get<int>();
            n.leaf_fraction = nj.at("leaf_fraction").get<double>();
            tree.nodes.push_back(n);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

json matrix_to_json(const ggnn::Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ggnn::Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw Error("bad-value", "tensor payload size does not match its shape");
    ggnn::Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
    }
    return m;
}

json ggnn_to_json(const ggnn::GgnnParams& p) {
    json j;
    j["config"] = {{"hidden_dim", p.config.hidden_dim},
                   {"steps", p.config.steps},
                   {"annotation_dim", p.config.annotation_dim},
                   {"external_dim", p.config.external_dim},
                   {"seed", p.config.seed}};
    json tensors;
    for (const auto& [name, m] : p.tensors()) tensors[name] = matrix_to_json(*m);
    j["tensors"] = std::move(tensors);
    return j;
}

ggnn::GgnnParams ggnn_from_json(const json& j) {
    ggnn::GgnnConfig config;
    const auto& cj = j.at("config");
    config.hidden_dim = cj.at("hidden_dim").get<std::size_t>();
    config.steps = cj.at("steps").get<std::size_t>();
    config.annotation_dim = cj.at("annotation_dim").get<std::size_t>();
    config.external_dim = cj.at("external_dim").get<std::size_t>();
    config.seed = cj.at("seed").get<std::uint64_t>();
    ggnn::GgnnParams p = ggnn::init_params(config);
    for (auto& [name, m] : p.tensors()) {
        *m = matrix_from_json(j.at("tensors").at(name));
    }
    return p;
}

}  // namespace

void persist_model(const StoredModel& m, const std::filesystem::path& path) {
    json payload;
    payload["kind"] = m.kind;
    payload["vocabulary_id"] = m.vocabulary_id;
    payload["pooling"] = std::string(models::to_string(m.pooling));
    payload["threshold"] = m.threshold;
    payload["seed"] = m.seed;
    if (m.linear) payload["linear"] = linear_to_json(*m.linear);
    if (m.forest) payload["forest"] = forest_to_json(*m.forest);
    if (m.ggnn_params) payload["ggnn"] = ggnn_to_json(*m.ggnn_params);

    json file;
    file["format_version"] = kFormatVersion;
    const std::string payload_text = payload.dump();
    file["payload"] = std::move(payload);
    file["checksum"] = to_hex(fnv1a64(payload_text));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write model " + path.string());
    out << file.dump(2) << '\n';
}

StoredModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read model " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();

    json file;
    try {
        file = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw Error("malformed-json", "model file is corrupted or truncated: " + std::string(e.what()));
    }

    const int version = file.value("format_version", -1);
    if (version != kFormatVersion)
        throw Error("version-mismatch", "model format version " + std::to_string(version) +
                                            " is not supported (expected " +
                                            std::to_string(kFormatVersion) + ")");

    if (!file.contains("payload") || !file.contains("checksum"))
        throw Error("malformed-json", "model file is missing payload or checksum");
    const std::string payload_text = file["payload"].dump();
    if (to_hex(fnv1a64(payload_text)) != file["checksum"].get<std::string>())
        throw Error("checksum-mismatch", "model payload does not match its checksum");

    const json& payload = file["payload"];
    StoredModel m;
    m.kind = payload.at("kind").get<std::string>();
    m.vocabulary_id = payload.value("vocabulary_id", std::string{});
    m.pooling = models::pooling_from_string(payload.value("pooling", "avg"));
    m.threshold = payload.value("threshold", 0.5);
    m.seed = payload.value("seed", std::uint64_t{0});
    if (payload.contains("linear")) m.linear = linear_from_json(payload["linear"]);
    if (payload.contains("forest")) m.forest = forest_from_json(payload["forest"]);
    if (payload.contains("ggnn")) m.ggnn_params = ggnn_from_json(payload["ggnn"]);
    return m;
}

double score(const StoredModel& m, const encoding::EncodedGraph& eg,
             const std::vector<double>* external) {
    if (m.kind == "ggnn") {
        if (!m.ggnn_params) throw Error("bad-value", "ggnn model has no parameters");
        return ggnn::ggnn_forward(eg, *m.ggnn_params, external).score;
    }
    const models::GraphVector x = models::pool(eg, m.pooling);
    if (m.kind == "forest") {
        if (!m.forest) throw Error("bad-value", "forest model has no parameters");
        return models::predict_score(*m.forest, x);
    }
    if (!m.linear) throw Error("bad-value", "linear model has no parameters");
    return models::predict_score(*m.linear, x);
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read embeddings " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw Error("malformed-json", e.what());
    }
    EmbeddingFile out;
    out.width = j.at("width").get<std::size_t>();
    for (const auto& [package, vec] : j.at("embeddings").items()) {
        auto values = vec.get<std::vector<double>>();
        if (values.size() != out.width)
            throw Error("width-mismatch", "embedding for '" + package + "' has width " +
                                              std::to_string(values.size()) + ", header declares " +
                                              std::to_string(out.width));
        out.embeddings.emplace(package, std::move(values));
    }
    return out;
}

}  // namespace flowtriage::model_store
