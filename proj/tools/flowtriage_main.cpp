// flowtriage: triage taint flows reported by dynamic analysis of Node.js
// packages. Subcommands cover corpus validation, encoding, training,
// evaluation, ranking, agreement and baseline analysis, operating-point
// selection, zero-shot LLM triage, and synthetic corpus generation.

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowtriage/common.hpp"
#include "flowtriage/dataset.hpp"
#include "flowtriage/encoding.hpp"
#include "flowtriage/experiment.hpp"
#include "flowtriage/ggnn.hpp"
#include "flowtriage/llm.hpp"
#include "flowtriage/metrics.hpp"
#include "flowtriage/model_store.hpp"
#include "flowtriage/provenance.hpp"
#include "flowtriage/synth.hpp"

namespace ft = flowtriage;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ft::Error("io", "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void ensure_splits(ft::dataset::Manifest& manifest, std::uint64_t seed) {
    const bool has_splits =
        std::all_of(manifest.rows.begin(), manifest.rows.end(),
                    [](const ft::dataset::ManifestRow& r) { return !r.split.empty(); });
    if (!has_splits) ft::dataset::split_dataset(manifest, {}, seed);
}

std::string format_opt(const ft::metrics::Metric& m) {
    if (!m) return "--";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << *m;
    return os.str();
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::vector<std::string>& files) {
    std::size_t rejected = 0;
    for (const auto& file : files) {
        const auto g = ft::provenance::parse_graph(read_file(file));
        const auto report = ft::provenance::validate(g);
        if (report.accepted()) {
            std::cout << file << ": accepted (" << g.nodes.size() << " nodes)\n";
        } else {
            ++rejected;
            std::cout << file << ": rejected";
            for (const auto& v : report.violations) {
                std::cout << " [" << ft::provenance::to_string(v.kind) << "]";
            }
            std::cout << '\n';
        }
    }
    if (rejected > 0)
        throw ft::Error("validation", std::to_string(rejected) + " of " +
                                          std::to_string(files.size()) + " graphs rejected");
    return 0;
}

// ------------------------------------------------------------------ encode

int cmd_encode(const std::string& manifest_path, const std::string& vocab_out,
               const std::string& features_out, std::uint64_t split_seed) {
    ft::dataset::Manifest manifest = ft::dataset::load_manifest(manifest_path);
    ensure_splits(manifest, split_seed);

    std::vector<ft::provenance::ProvenanceGraph> train;
    for (const auto* row : ft::dataset::rows_in_split(manifest, "train")) {
        train.push_back(ft::dataset::load_graph(manifest, *row));
    }
    const std::string corpus_id =
        manifest.base_dir.filename().string() + ":" + std::to_string(manifest.rows.size());
    const auto vocab = ft::encoding::build_vocabulary(train, corpus_id);

    std::ofstream vout(vocab_out, std::ios::binary);
    if (!vout) throw ft::Error("io", "cannot write " + vocab_out);
    vout << vocab.to_json() << '\n';
    std::cout << "vocabulary: " << vocab.entries().size() << " operations -> " << vocab_out
              << '\n';

    if (!features_out.empty()) {
        std::filesystem::create_directories(features_out);
        for (const auto& row : manifest.rows) {
            const auto g = ft::dataset::load_graph(manifest, row);
            const auto eg = ft::encoding::encode_graph(g, vocab);
            json j;
            j["package"] = eg.package_name;
            if (eg.label) j["label"] = *eg.label;
            json feats = json::array();
            for (const auto& n : eg.node_features) feats.push_back(n.features);
            j["features"] = std::move(feats);
            json edges = json::array();
            for (const auto& [s, d] : eg.edges) edges.push_back({s, d});
            j["edges"] = std::move(edges);
            std::ofstream out(std::filesystem::path(features_out) / (row.package + ".json"),
                              std::ios::binary);
            out << j.dump() << '\n';
        }
        std::cout << "features: " << manifest.rows.size() << " graphs -> " << features_out << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainOptions {
    std::string manifest;
    std::string kind = "logistic";
    std::string pooling = "max";
    std::string out = "model.json";
    std::string vocab_path;
    std::uint64_t seed = 2025;
    std::uint64_t split_seed = 2025;
    double learning_rate = 0.001;
    std::size_t epochs = 150;
    std::size_t batch_size = 64;
    std::size_t n_trees = 100;
    std::size_t hidden_dim = 128;
    std::size_t steps = 8;
    double weight_decay = 0.1;
    std::size_t patience = 20;
};

int cmd_train(const TrainOptions& opt) {
    ft::dataset::Manifest manifest = ft::dataset::load_manifest(opt.manifest);
    ensure_splits(manifest, opt.split_seed);

    ft::experiment::ExperimentConfig cfg;
    cfg.manifest_path = opt.manifest;
    cfg.out_dir = std::filesystem::path(opt.out).parent_path().empty()
                      ? "."
                      : std::filesystem::path(opt.out).parent_path();
    cfg.seeds = {opt.seed};

    ft::experiment::ModelSpec spec;
    spec.kind = opt.kind;
    spec.name = opt.kind;
    spec.pooling = ft::models::pooling_from_string(opt.pooling);
    spec.learning_rate = opt.learning_rate;
    spec.epochs = opt.epochs;
    spec.batch_size = opt.batch_size;
    spec.n_trees = opt.n_trees;
    spec.hidden_dim = opt.hidden_dim;
    spec.steps = opt.steps;
    spec.weight_decay = opt.weight_decay;
    spec.patience = opt.patience;

    // reuse the experiment plumbing for a single model/seed run, then move
    // the persisted artifact where the caller asked
    cfg.models = {spec};
    const auto report = ft::experiment::run_experiment(cfg);
    const auto produced =
        cfg.out_dir / "models" / (spec.name + "-seed" + std::to_string(opt.seed) + ".json");
    if (std::filesystem::path(opt.out) != produced) {
        std::filesystem::rename(produced, opt.out);
    }
    const auto& run = report.models.front().runs.front();
    std::cout << "trained " << opt.kind << " (seed " << opt.seed << ") -> " << opt.out << '\n';
    std::cout << "test F1 " << format_opt(run.f1) << ", precision " << format_opt(run.precision)
              << ", recall " << format_opt(run.recall) << ", accuracy "
              << format_opt(run.accuracy) << '\n';
    return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const std::string& config_path) {
    const auto cfg = ft::experiment::load_config(config_path);
    const auto report = ft::experiment::run_experiment(cfg);
    std::cout << "evaluated " << report.models.size() << " model(s) over "
              << (report.models.empty() ? 0 : report.models.front().runs.size())
              << " seed(s); reports in " << cfg.out_dir.string() << '\n';
    for (const auto& model : report.models) {
        std::vector<double> f1s;
        for (const auto& run : model.runs) {
            if (run.f1) f1s.push_back(*run.f1);
        }
        std::cout << "  " << model.name << ": mean F1 ";
        if (f1s.empty()) {
            std::cout << "--";
        } else {
            double mean = 0.0;
            for (const double v : f1s) mean += v;
            std::cout << format_opt(mean / static_cast<double>(f1s.size()));
        }
        std::cout << '\n';
    }
    return 0;
}

// -------------------------------------------------------------------- rank

int cmd_rank(const std::string& model_path, const std::string& vocab_path,
             const std::string& manifest_path, const std::string& split, const std::string& out,
             std::uint64_t split_seed) {
    const auto model = ft::model_store::load_model(model_path);
    const auto vocab = ft::encoding::OperationVocabulary::from_json(read_file(vocab_path));
    ft::dataset::Manifest manifest = ft::dataset::load_manifest(manifest_path);
    if (!split.empty()) ensure_splits(manifest, split_seed);

    std::vector<const ft::dataset::ManifestRow*> subset;
    if (split.empty()) {
        for (const auto& r : manifest.rows) subset.push_back(&r);
    } else {
        subset = ft::dataset::rows_in_split(manifest, split);
    }

    const auto report = ft::experiment::rank(model, vocab, manifest, subset);
    ft::experiment::write_ranked_csv(report, out);
    std::cout << "ranked " << report.rows.size() << " package(s) -> " << out << '\n';
    for (const auto& [fraction, precision] : report.top_n_precision) {
        std::cout << "  top " << static_cast<int>(fraction * 100) << "%: precision "
                  << format_opt(precision) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------- kappa

std::map<std::string, bool> read_verdicts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ft::Error("io", "cannot read " + path);
    std::map<std::string, bool> verdicts;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("package,", 0) == 0) {
            first = false;
            continue;  // header
        }
        first = false;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ft::Error("bad-value", "expected 'package,verdict' rows in " + path);
        std::string value = line.substr(comma + 1);
        const auto next = value.find(',');
        if (next != std::string::npos) value.resize(next);
        verdicts[line.substr(0, comma)] = value == "1" || value == "true";
    }
    return verdicts;
}

int cmd_kappa(const std::string& a_path, const std::string& b_path) {
    const auto a = read_verdicts(a_path);
    const auto b = read_verdicts(b_path);
    std::vector<bool> va, vb;
    for (const auto& [package, verdict] : a) {
        const auto it = b.find(package);
        if (it == b.end())
            throw ft::Error("bad-value", "package '" + package + "' missing from " + b_path);
        va.push_back(verdict);
        vb.push_back(it->second);
    }
    if (a.size() != b.size())
        throw ft::Error("bad-value", "verdict files rate different package sets");
    const auto kappa = ft::metrics::cohens_kappa(va, vb);
    std::cout << "packages: " << va.size() << "\nkappa: "
              << (kappa ? std::to_string(*kappa) : "undefined") << '\n';
    return 0;
}

// ---------------------------------------------------------------- baseline

int cmd_baseline(double p, std::uint64_t n_pos, std::uint64_t n_neg, std::uint64_t trials,
                 std::uint64_t seed) {
    const auto expected = ft::metrics::expected_random_baseline(p, n_pos, n_neg);
    std::cout.setf(std::ios::fixed);
    std::cout.precision(3);
    std::cout << "closed-form expected metrics of Bernoulli(p=" << p << ") on " << n_pos << " / "
              << n_neg << ":\n";
    std::cout << "  precision " << format_opt(expected.precision) << "  recall " << expected.recall
              << "  F1 " << format_opt(expected.f1) << "  accuracy " << expected.accuracy << '\n';

    if (trials > 0) {
        std::mt19937_64 gen(seed);
        double f1_sum = 0.0;
        std::size_t f1_defined = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            ft::metrics::ConfusionCounts c;
            for (std::uint64_t i = 0; i < n_pos; ++i) {
                (ft::rng::unit(gen) < p ? c.tp : c.fn)++;
            }
            for (std::uint64_t i = 0; i < n_neg; ++i) {
                (ft::rng::unit(gen) < p ? c.fp : c.tn)++;
            }
            if (const auto f1 = ft::metrics::f1(c)) {
                f1_sum += *f1;
                ++f1_defined;
            }
        }
        std::cout << "simulated mean F1 over " << trials
                  << " trial(s): " << (f1_defined ? f1_sum / static_cast<double>(f1_defined) : 0.0)
                  << '\n';
    }
    return 0;
}

// ---------------------------------------------------------- operating-point

int cmd_operating_point(const std::string& scores_path, double min_precision, double max_fnr) {
    std::ifstream in(scores_path);
    if (!in) throw ft::Error("io", "cannot read " + scores_path);
    std::vector<double> scores;
    std::vector<bool> labels;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("package,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() < 3)
            throw ft::Error("bad-value", "expected 'package,score,label' rows in " + scores_path);
        scores.push_back(std::stod(fields[1]));
        labels.push_back(fields[2] == "1" || fields[2] == "true");
    }

    ft::metrics::OperatingTarget target;
    if (max_fnr >= 0.0) {
        target = {ft::metrics::OperatingTarget::Kind::max_fnr, max_fnr};
    } else {
        target = {ft::metrics::OperatingTarget::Kind::min_precision, min_precision};
    }
    const auto point = ft::metrics::select_operating_point(scores, labels, target);
    if (!point.attainable) {
        std::cout << "target unattainable on this score set\n";
        return 0;
    }
    std::cout.setf(std::ios::fixed);
    std::cout.precision(4);
    std::cout << "threshold " << point.threshold << "\n  precision "
              << format_opt(point.precision) << "\n  recall " << format_opt(point.recall)
              << "\n  false-negative rate " << format_opt(point.fnr)
              << "\n  negatives excluded from review " << format_opt(point.negatives_excluded)
              << '\n';
    return 0;
}

// ------------------------------------------------------------ llm-zero-shot

struct LlmOptions {
    std::string manifest;
    std::string split = "test";
    std::string base_url;
    std::string model;
    std::string api_key_env = "FLOWTRIAGE_API_KEY";
    std::string transcript = "llm-transcript.jsonl";
    std::string verdicts_out = "llm-verdicts.csv";
    std::string replay;
    std::size_t budget = 1024;
    std::size_t concurrency = 1;  // in-flight request cap
    std::uint64_t split_seed = 2025;
};

ft::llm::Transport replay_transport(const std::string& replay_path) {
    // recorded responses keyed by prompt hash; replays a prior transcript
    auto responses = std::make_shared<std::map<std::string, std::string>>();
    std::ifstream in(replay_path);
    if (!in) throw ft::Error("io", "cannot read replay transcript " + replay_path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        (*responses)[j.at("prompt_hash").get<std::string>()] =
            j.at("raw_response").get<std::string>();
    }
    return [responses](const std::string&, const std::vector<ft::llm::Header>&,
                       const std::string& body) -> ft::llm::HttpResponse {
        const json request = json::parse(body);
        const std::string prompt = request.at("messages").at(0).at("content").get<std::string>();
        const auto it = responses->find(ft::to_hex(ft::fnv1a64(prompt)));
        if (it == responses->end()) return {404, "no recorded response for this prompt"};
        json reply;
        reply["choices"] = json::array(
            {{{"message", {{"role", "assistant"}, {"content", it->second}}}}});
        return {200, reply.dump()};
    };
}

int cmd_llm_zero_shot(const LlmOptions& opt) {
    ft::dataset::Manifest manifest = ft::dataset::load_manifest(opt.manifest);
    if (!opt.split.empty()) ensure_splits(manifest, opt.split_seed);
    std::vector<const ft::dataset::ManifestRow*> subset;
    if (opt.split.empty()) {
        for (const auto& r : manifest.rows) subset.push_back(&r);
    } else {
        subset = ft::dataset::rows_in_split(manifest, opt.split);
    }

    ft::llm::ChatEndpoint endpoint;
    endpoint.base_url = opt.base_url;
    endpoint.model = opt.model;
    endpoint.api_key_env = opt.api_key_env;
    const ft::llm::Transport transport =
        opt.replay.empty() ? ft::llm::http_transport() : replay_transport(opt.replay);

    ft::llm::TranscriptWriter transcript(opt.transcript);

    struct RowResult {
        bool verdict = false;
        std::optional<bool> label;
    };
    std::vector<RowResult> results(subset.size());

    // bounded in-flight requests; the transcript is the only shared writer
    std::mutex transcript_mutex;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subset.size()) return;
            try {
                const auto* row = subset[i];
                const auto g = ft::dataset::load_graph(manifest, *row);
                const auto sinks = ft::provenance::sink_nodes(g);

                ft::llm::SnippetRequest req;
                const std::filesystem::path source = manifest.base_dir / row->source_path;
                req.package_root = source.parent_path();
                req.sink_file = source.filename().string();
                req.sink_line = static_cast<std::size_t>(sinks.front().position.start_line);
                req.sink_col = static_cast<std::size_t>(sinks.front().position.start_col);
                req.token_budget = opt.budget;

                const std::string prompt = ft::llm::build_prompt(ft::llm::extract_snippet(req));
                const auto requested_at = std::chrono::system_clock::now();
                const auto verdict = ft::llm::classify_zero_shot(endpoint, prompt, transport);
                {
                    const std::lock_guard<std::mutex> lock(transcript_mutex);
                    transcript.record(row->package, prompt, verdict, requested_at,
                                      std::chrono::system_clock::now());
                }
                results[i].verdict = verdict.verdict;
                results[i].label = row->label.has_value() ? row->label : g.label;
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(opt.concurrency, subset.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::ofstream verdicts(opt.verdicts_out, std::ios::binary);
    if (!verdicts) throw ft::Error("io", "cannot write " + opt.verdicts_out);
    verdicts << "package,verdict,label\n";
    std::vector<bool> predicted, actual;
    bool all_labeled = true;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const auto& r = results[i];
        verdicts << subset[i]->package << ',' << (r.verdict ? 1 : 0) << ','
                 << (r.label ? (*r.label ? "1" : "0") : "") << '\n';
        predicted.push_back(r.verdict);
        if (r.label) {
            actual.push_back(*r.label);
        } else {
            all_labeled = false;
        }
    }

    std::cout << "classified " << predicted.size() << " package(s) -> " << opt.verdicts_out
              << " (transcript " << opt.transcript << ")\n";
    if (all_labeled && !predicted.empty()) {
        const auto c = ft::metrics::confusion(predicted, actual);
        std::cout << "F1 " << format_opt(ft::metrics::f1(c)) << ", precision "
                  << format_opt(ft::metrics::precision(c)) << ", recall "
                  << format_opt(ft::metrics::recall(c)) << ", accuracy "
                  << format_opt(ft::metrics::accuracy(c)) << '\n';
    }
    return 0;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const std::string& profile_name, std::size_t n, double ratio, std::uint64_t seed,
              const std::string& out, std::size_t min_nodes, std::size_t max_nodes, double noise) {
    ft::synth::SynthProfile profile;
    profile.kind = ft::synth::profile_from_string(profile_name);
    profile.n_packages = n;
    profile.vuln_ratio = ratio;
    profile.seed = seed;
    profile.min_nodes = min_nodes;
    profile.max_nodes = max_nodes;
    profile.label_noise = noise;
    const auto manifest = ft::synth::generate_corpus(profile, out);
    std::size_t vulnerable = 0;
    for (const auto& row : manifest) vulnerable += row.label ? 1 : 0;
    std::cout << "generated " << manifest.size() << " package(s), " << vulnerable
              << " vulnerable -> " << out << "/manifest.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triage engine for taint flows reported by dynamic analysis"};
    app.require_subcommand(1);

    // validate
    std::vector<std::string> validate_files;
    auto* validate = app.add_subcommand("validate", "parse and validate provenance graphs");
    validate->add_option("files", validate_files, "graph JSON files")->required();

    // encode
    std::string enc_manifest, enc_vocab = "vocabulary.json", enc_features;
    std::uint64_t enc_seed = 2025;
    auto* encode = app.add_subcommand("encode", "build the operation vocabulary and encode graphs");
    encode->add_option("--manifest", enc_manifest, "corpus manifest CSV")->required();
    encode->add_option("--vocab-out", enc_vocab, "vocabulary output path");
    encode->add_option("--features-out", enc_features, "directory for per-package feature dumps");
    encode->add_option("--split-seed", enc_seed, "seed when the manifest lacks splits");

    // train
    TrainOptions train_opt;
    auto* train = app.add_subcommand("train", "train one model on the train split");
    train->add_option("--manifest", train_opt.manifest, "corpus manifest CSV")->required();
    train->add_option("--kind", train_opt.kind, "logistic | linear-svm | forest | ggnn");
    train->add_option("--pooling", train_opt.pooling, "avg | max (classical kinds)");
    train->add_option("--out", train_opt.out, "model output path");
    train->add_option("--seed", train_opt.seed, "training seed");
    train->add_option("--split-seed", train_opt.split_seed, "seed when the manifest lacks splits");
    train->add_option("--learning-rate", train_opt.learning_rate, "");
    train->add_option("--epochs", train_opt.epochs, "");
    train->add_option("--batch-size", train_opt.batch_size, "");
    train->add_option("--n-trees", train_opt.n_trees, "");
    train->add_option("--hidden-dim", train_opt.hidden_dim, "");
    train->add_option("--steps", train_opt.steps, "");
    train->add_option("--weight-decay", train_opt.weight_decay, "");
    train->add_option("--patience", train_opt.patience, "");

    // evaluate
    std::string eval_config;
    auto* evaluate = app.add_subcommand("evaluate", "run the configured experiment matrix");
    evaluate->add_option("--config", eval_config, "experiment config JSON")->required();

    // rank
    std::string rank_model, rank_vocab, rank_manifest, rank_split = "test",
                rank_out = "ranked.csv";
    std::uint64_t rank_seed = 2025;
    auto* rank = app.add_subcommand("rank", "rank packages by model confidence");
    rank->add_option("--model", rank_model, "stored model JSON")->required();
    rank->add_option("--vocab", rank_vocab, "vocabulary JSON")->required();
    rank->add_option("--manifest", rank_manifest, "corpus manifest CSV")->required();
    rank->add_option("--split", rank_split, "split to rank; empty = whole corpus");
    rank->add_option("--out", rank_out, "ranked CSV output");
    rank->add_option("--split-seed", rank_seed, "seed when the manifest lacks splits");

    // kappa
    std::string kappa_a, kappa_b;
    auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two verdict files");
    kappa->add_option("--a", kappa_a, "first verdict CSV (package,verdict)")->required();
    kappa->add_option("--b", kappa_b, "second verdict CSV (package,verdict)")->required();

    // baseline
    double base_p = 0.5;
    std::uint64_t base_pos = 137, base_neg = 52, base_trials = 0, base_seed = 2025;
    auto* baseline = app.add_subcommand("baseline", "expected metrics of a random predictor");
    baseline->add_option("--p", base_p, "probability of predicting vulnerable");
    baseline->add_option("--pos", base_pos, "positive count in the evaluation set");
    baseline->add_option("--neg", base_neg, "negative count in the evaluation set");
    baseline->add_option("--simulate", base_trials, "also simulate this many seeded trials");
    baseline->add_option("--seed", base_seed, "simulation seed");

    // operating-point
    std::string op_scores;
    double op_precision = 0.8, op_fnr = -1.0;
    auto* op = app.add_subcommand("operating-point", "select a score threshold for a target");
    op->add_option("--scores", op_scores, "CSV with package,score,label rows")->required();
    op->add_option("--min-precision", op_precision, "loosest threshold with precision >= target");
    op->add_option("--max-fnr", op_fnr, "strictest threshold with FNR <= target");

    // llm-zero-shot
    LlmOptions llm_opt;
    auto* llm = app.add_subcommand("llm-zero-shot", "zero-shot triage via a chat-completion API");
    llm->add_option("--manifest", llm_opt.manifest, "corpus manifest CSV")->required();
    llm->add_option("--split", llm_opt.split, "split to classify; empty = whole corpus");
    llm->add_option("--base-url", llm_opt.base_url, "endpoint origin, e.g. https://host");
    llm->add_option("--model", llm_opt.model, "model name sent to the endpoint");
    llm->add_option("--api-key-env", llm_opt.api_key_env, "environment variable with the API key");
    llm->add_option("--budget", llm_opt.budget, "snippet token budget");
    llm->add_option("--concurrency", llm_opt.concurrency, "in-flight request cap");
    llm->add_option("--transcript", llm_opt.transcript, "JSONL transcript output");
    llm->add_option("--verdicts-out", llm_opt.verdicts_out, "verdict CSV output");
    llm->add_option("--replay", llm_opt.replay, "replay recorded responses instead of the network");
    llm->add_option("--split-seed", llm_opt.split_seed, "seed when the manifest lacks splits");

    // synth
    std::string synth_profile = "separable", synth_out = "synth-corpus";
    std::size_t synth_n = 1250, synth_min = 4, synth_max = 10;
    double synth_ratio = 0.657, synth_noise = 0.15;
    std::uint64_t synth_seed = 2025;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    synth->add_option("--profile", synth_profile, "separable | noisy | spawn-benign");
    synth->add_option("--n", synth_n, "package count");
    synth->add_option("--ratio", synth_ratio, "vulnerable fraction");
    synth->add_option("--seed", synth_seed, "corpus seed");
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--min-nodes", synth_min, "");
    synth->add_option("--max-nodes", synth_max, "");
    synth->add_option("--noise", synth_noise, "label flip rate (noisy profile)");

    try {
        app.parse(argc, argv);

        if (*validate) return cmd_validate(validate_files);
        if (*encode) return cmd_encode(enc_manifest, enc_vocab, enc_features, enc_seed);
        if (*train) return cmd_train(train_opt);
        if (*evaluate) return cmd_evaluate(eval_config);
        if (*rank)
            return cmd_rank(rank_model, rank_vocab, rank_manifest, rank_split, rank_out, rank_seed);
        if (*kappa) return cmd_kappa(kappa_a, kappa_b);
        if (*baseline) return cmd_baseline(base_p, base_pos, base_neg, base_trials, base_seed);
        if (*op) return cmd_operating_point(op_scores, op_precision, op_fnr);
        if (*llm) return cmd_llm_zero_shot(llm_opt);
        if (*synth)
            return cmd_synth(synth_profile, synth_n, synth_ratio, synth_seed, synth_out, synth_min,
                             synth_max, synth_noise);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        json err;
        err["error"] = "usage";
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return e.get_exit_code();
    } catch (const ft::Error& e) {
        json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "internal";
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        return 1;
    }
}
