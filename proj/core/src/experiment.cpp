#include "flowtriage/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flowtriage/common.hpp"
#include "flowtriage/ggnn.hpp"

namespace flowtriage::experiment {

using nlohmann::json;

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw Error("malformed-json", e.what());
    }

    ExperimentConfig cfg;
    cfg.manifest_path = j.at("manifest").get<std::string>();
    cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw Error("config", "at least one seed is required");
    cfg.split_seed = j.value("split_seed", std::uint64_t{2025});
    cfg.workers = j.value("workers", std::size_t{0});
    if (j.contains("ratios")) {
        const auto r = j["ratios"].get<std::vector<unsigned>>();
        if (r.size() != 3) throw Error("config", "ratios must be three integers");
        cfg.ratios = {r[0], r[1], r[2]};
    }

    if (!j.contains("models") || !j["models"].is_array() || j["models"].empty())
        throw Error("config", "config must list at least one model");
    for (const auto& mj : j["models"]) {
        ModelSpec spec;
        spec.kind = mj.at("kind").get<std::string>();
        if (mj.contains("pooling"))
            spec.pooling = models::pooling_from_string(mj["pooling"].get<std::string>());
        spec.name = mj.value("name", spec.kind + "-" + std::string(models::to_string(spec.pooling)));
        spec.learning_rate = mj.value("learning_rate", spec.learning_rate);
        spec.epochs = mj.value("epochs", spec.epochs);
        spec.batch_size = mj.value("batch_size", spec.batch_size);
        spec.n_trees = mj.value("n_trees", spec.n_trees);
        spec.max_depth = mj.value("max_depth", spec.max_depth);
        spec.min_leaf = mj.value("min_leaf", spec.min_leaf);
        spec.feature_subsample = mj.value("feature_subsample", spec.feature_subsample);
        spec.hidden_dim = mj.value("hidden_dim", spec.hidden_dim);
        spec.steps = mj.value("steps", spec.steps);
        spec.weight_decay = mj.value("weight_decay", spec.weight_decay);
        spec.patience = mj.value("patience", spec.patience);
        spec.embeddings_path = mj.value("embeddings", spec.embeddings_path);

        static const std::vector<std::string> known{"logistic", "linear-svm", "forest", "ggnn",
                                                    "ggnn-fusion"};
        if (std::find(known.begin(), known.end(), spec.kind) == known.end())
            throw Error("config", "unknown model kind '" + spec.kind + "'");
        cfg.models.push_back(std::move(spec));
    }
    return cfg;
}

namespace {

struct EncodedCorpus {
    std::vector<encoding::EncodedGraph> train, val, test;
    std::vector<bool> train_labels, val_labels, test_labels;
    std::vector<std::string> test_packages;
    encoding::OperationVocabulary vocabulary;
    std::string vocabulary_id;
};

EncodedCorpus encode_corpus(const dataset::Manifest& manifest) {
    EncodedCorpus corpus;

    std::vector<provenance::ProvenanceGraph> train_graphs;
    for (const auto* row : dataset::rows_in_split(manifest, "train")) {
        train_graphs.push_back(dataset::load_graph(manifest, *row));
    }
    if (train_graphs.empty()) throw Error("empty-corpus", "train split has no rows");
    const std::string corpus_id =
        manifest.base_dir.filename().string() + ":" + std::to_string(manifest.rows.size());
    corpus.vocabulary = encoding::build_vocabulary(train_graphs, corpus_id);
    corpus.vocabulary_id = to_hex(fnv1a64(corpus.vocabulary.to_json()));

    const auto encode_split = [&](std::string_view split, std::vector<encoding::EncodedGraph>& out,
                                  std::vector<bool>& labels, std::vector<std::string>* packages) {
        for (const auto* row : dataset::rows_in_split(manifest, split)) {
            const auto g = dataset::load_graph(manifest, *row);
            if (!g.label.has_value() && !row->label.has_value())
                throw Error("bad-value", "package '" + row->package + "' has no label");
            out.push_back(encoding::encode_graph(g, corpus.vocabulary));
            labels.push_back(row->label.value_or(g.label.value_or(false)));
            if (packages) packages->push_back(row->package);
        }
    };
    encode_split("train", corpus.train, corpus.train_labels, nullptr);
    encode_split("validate", corpus.val, corpus.val_labels, nullptr);
    encode_split("test", corpus.test, corpus.test_labels, &corpus.test_packages);
    return corpus;
}

std::vector<models::LabeledVector> pooled_set(const std::vector<encoding::EncodedGraph>& graphs,
                                              const std::vector<bool>& labels,
                                              models::Pooling pooling) {
    std::vector<models::LabeledVector> out;
    out.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        out.push_back({models::pool(graphs[i], pooling), labels[i]});
    }
    return out;
}

model_store::StoredModel train_one(const ModelSpec& spec, const EncodedCorpus& corpus,
                                   std::uint64_t seed,
                                   const model_store::EmbeddingFile* embeddings) {
    model_store::StoredModel stored;
    stored.vocabulary_id = corpus.vocabulary_id;
    stored.pooling = spec.pooling;
    stored.seed = seed;

    if (spec.kind == "logistic" || spec.kind == "linear-svm") {
        models::LinearConfig cfg;
        cfg.kind = spec.kind == "logistic" ? models::LinearKind::logistic
                                           : models::LinearKind::linear_svm;
        cfg.learning_rate = spec.learning_rate;
        cfg.epochs = spec.epochs;
        cfg.batch_size = spec.batch_size;
        cfg.seed = seed;
        stored.kind = spec.kind;
        stored.linear =
            models::train_linear(pooled_set(corpus.train, corpus.train_labels, spec.pooling), cfg);
        return stored;
    }
    if (spec.kind == "forest") {
        models::ForestConfig cfg;
        cfg.n_trees = spec.n_trees;
        cfg.max_depth = spec.max_depth;
        cfg.min_leaf = spec.min_leaf;
        cfg.feature_subsample = spec.feature_subsample;
        cfg.seed = seed;
        stored.kind = "forest";
        stored.forest =
            models::train_forest(pooled_set(corpus.train, corpus.train_labels, spec.pooling), cfg);
        return stored;
    }

    // ggnn / ggnn-fusion
    ggnn::GgnnConfig arch;
    arch.hidden_dim = spec.hidden_dim;
    arch.steps = spec.steps;
    arch.seed = seed;
    if (spec.kind == "ggnn-fusion") {
        if (embeddings == nullptr)
            throw Error("config", "model '" + spec.name + "' needs an embeddings file");
        arch.external_dim = embeddings->width;
    }

    const auto examples = [&](const std::vector<encoding::EncodedGraph>& graphs,
                              const std::vector<bool>& labels) {
        std::vector<ggnn::TrainExample> out;
        out.reserve(graphs.size());
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const std::vector<double>* ext = nullptr;
            if (arch.external_dim > 0) {
                const auto it = embeddings->embeddings.find(graphs[i].package_name);
                if (it == embeddings->embeddings.end())
                    throw Error("missing-embedding",
                                "no external embedding for package '" + graphs[i].package_name + "'");
                ext = &it->second;
            }
            out.push_back({&graphs[i], labels[i], ext});
        }
        return out;
    };

    ggnn::TrainConfig tcfg;
    tcfg.learning_rate = spec.learning_rate;
    tcfg.batch_size = spec.batch_size;
    tcfg.weight_decay = spec.weight_decay;
    tcfg.max_epochs = spec.epochs;
    tcfg.patience = std::min(spec.patience, spec.epochs);
    tcfg.seed = seed;

    const ggnn::GgnnModel model =
        ggnn::train_ggnn(examples(corpus.train, corpus.train_labels),
                         examples(corpus.val, corpus.val_labels), arch, tcfg);
    stored.kind = "ggnn";
    stored.ggnn_params = model.params;
    stored.threshold = model.threshold;
    return stored;
}

std::vector<double> score_split(const model_store::StoredModel& model, const EncodedCorpus& corpus,
                                const model_store::EmbeddingFile* embeddings) {
    const auto external_for = [&](const encoding::EncodedGraph& eg) -> const std::vector<double>* {
        if (!model.ggnn_params || model.ggnn_params->config.external_dim == 0) return nullptr;
        const auto it = embeddings->embeddings.find(eg.package_name);
        if (it == embeddings->embeddings.end())
            throw Error("missing-embedding",
                        "no external embedding for package '" + eg.package_name + "'");
        return &it->second;
    };

    if (model.ggnn_params) {
        std::vector<ggnn::GraphRef> refs;
        refs.reserve(corpus.test.size());
        for (const auto& eg : corpus.test) refs.push_back({&eg, external_for(eg)});
        return ggnn::ggnn_scores(refs, *model.ggnn_params);
    }

    std::vector<double> scores;
    scores.reserve(corpus.test.size());
    for (const auto& eg : corpus.test) {
        scores.push_back(model_store::score(model, eg, nullptr));
    }
    return scores;
}

std::string format_metric(const metrics::Metric& m, int digits = 6) {
    if (!m) return "";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << *m;
    return os.str();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    dataset::Manifest manifest = dataset::load_manifest(cfg.manifest_path);
    const bool has_splits = std::all_of(manifest.rows.begin(), manifest.rows.end(),
                                        [](const dataset::ManifestRow& r) { return !r.split.empty(); });
    if (!has_splits) dataset::split_dataset(manifest, cfg.ratios, cfg.split_seed);

    const EncodedCorpus corpus = encode_corpus(manifest);

    std::filesystem::create_directories(cfg.out_dir / "models");
    {
        std::ofstream vout(cfg.out_dir / "vocabulary.json", std::ios::binary);
        if (!vout) throw Error("io", "cannot write vocabulary");
        vout << corpus.vocabulary.to_json() << '\n';
    }

    ExperimentReport report;
    report.vocabulary_id = corpus.vocabulary_id;

    // embeddings are loaded once up front; jobs only read them
    std::vector<std::optional<model_store::EmbeddingFile>> embeddings(cfg.models.size());
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        if (cfg.models[mi].kind == "ggnn-fusion") {
            if (cfg.models[mi].embeddings_path.empty())
                throw Error("config",
                            "model '" + cfg.models[mi].name + "' needs an 'embeddings' path");
            embeddings[mi] = model_store::load_embeddings(cfg.models[mi].embeddings_path);
        }
    }

    report.models.resize(cfg.models.size());
    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        report.models[mi].name = cfg.models[mi].name;
        report.models[mi].runs.resize(cfg.seeds.size());
    }

    // (model, seed) jobs are independent; a bounded pool runs them and each
    // writes into its own report slot, so the output order stays fixed
    const std::size_t job_count = cfg.models.size() * cfg.seeds.size();
    std::size_t workers = cfg.workers;
    if (workers == 0) {
        workers = std::min<std::size_t>(4, std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = std::min(workers, job_count);

    std::atomic<std::size_t> next_job{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto run_job = [&](std::size_t job) {
        const std::size_t mi = job / cfg.seeds.size();
        const std::size_t si = job % cfg.seeds.size();
        const auto& spec = cfg.models[mi];
        const std::uint64_t seed = cfg.seeds[si];
        const model_store::EmbeddingFile* emb = embeddings[mi] ? &*embeddings[mi] : nullptr;

        const model_store::StoredModel stored = train_one(spec, corpus, seed, emb);
        model_store::persist_model(
            stored, cfg.out_dir / "models" / (spec.name + "-seed" + std::to_string(seed) + ".json"));

        const std::vector<double> scores = score_split(stored, corpus, emb);
        std::vector<bool> verdicts;
        verdicts.reserve(scores.size());
        for (const double s : scores) verdicts.push_back(s >= stored.threshold);

        SeedRun run;
        run.seed = seed;
        run.counts = metrics::confusion(verdicts, corpus.test_labels);
        run.f1 = metrics::f1(run.counts);
        run.precision = metrics::precision(run.counts);
        run.recall = metrics::recall(run.counts);
        run.accuracy = metrics::accuracy(run.counts);
        run.average_precision =
            metrics::average_precision(metrics::pr_curve(scores, corpus.test_labels));
        report.models[mi].runs[si] = run;
    };

    const auto worker_loop = [&] {
        for (;;) {
            const std::size_t job = next_job.fetch_add(1);
            if (job >= job_count) return;
            try {
                run_job(job);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        worker_loop();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    write_metrics_csv(report, cfg.out_dir / "metrics.csv");
    write_summary_markdown(report, cfg.out_dir / "summary.md");
    return report;
}

RankedReport rank(const model_store::StoredModel& model, const encoding::OperationVocabulary& vocab,
                  const dataset::Manifest& manifest,
                  const std::vector<const dataset::ManifestRow*>& subset) {
    const std::string vocab_id = to_hex(fnv1a64(vocab.to_json()));
    if (!model.vocabulary_id.empty() && model.vocabulary_id != vocab_id)
        throw Error("vocab-mismatch", "model was trained against vocabulary " +
                                          model.vocabulary_id + ", corpus has " + vocab_id);

    RankedReport report;
    report.has_labels = !subset.empty();
    for (const auto* row : subset) {
        const provenance::ProvenanceGraph g = dataset::load_graph(manifest, *row);
        const auto eg = encoding::encode_graph(g, vocab);
        const double s = model_store::score(model, eg, nullptr);

        RankedRow out;
        out.package = row->package;
        out.score = s;
        out.verdict = s >= model.threshold;
        out.model_id = model.kind + "-seed" + std::to_string(model.seed);
        const auto sinks = provenance::sink_nodes(g);  // first sink in id order
        out.sink_file = sinks.front().file_path;
        out.sink_position = sinks.front().position;
        out.label = row->label.has_value() ? row->label : g.label;
        if (!out.label.has_value()) report.has_labels = false;
        report.rows.push_back(std::move(out));
    }

    std::sort(report.rows.begin(), report.rows.end(), [](const RankedRow& a, const RankedRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.package < b.package;
    });

    if (report.has_labels && !report.rows.empty()) {
        std::vector<double> scores;
        std::vector<bool> labels;
        for (const auto& r : report.rows) {
            scores.push_back(r.score);
            labels.push_back(*r.label);
        }
        for (const double fraction : {0.05, 0.10, 0.25, 0.50, 1.00}) {
            report.top_n_precision.emplace_back(
                fraction, metrics::top_n_precision(scores, labels, fraction));
        }
    }
    return report;
}

void write_ranked_csv(const RankedReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write ranked report " + path.string());
    out << "package,score,verdict,model,sink_file,sink_line,sink_col\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& r : report.rows) {
        out << r.package << ',' << r.score << ',' << (r.verdict ? 1 : 0) << ',' << r.model_id
            << ',' << r.sink_file << ',' << r.sink_position.start_line << ','
            << r.sink_position.start_col << '\n';
    }
    if (!report.top_n_precision.empty()) {
        out << "\nfraction,top_n_precision\n";
        for (const auto& [fraction, value] : report.top_n_precision) {
            out << fraction << ',' << value << '\n';
        }
    }
}

void write_metrics_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write metrics " + path.string());
    out << "model,seed,tp,fp,fn,tn,f1,precision,recall,accuracy,ap\n";
    for (const auto& model : report.models) {
        for (const auto& run : model.runs) {
            out << model.name << ',' << run.seed << ',' << run.counts.tp << ',' << run.counts.fp
                << ',' << run.counts.fn << ',' << run.counts.tn << ',' << format_metric(run.f1)
                << ',' << format_metric(run.precision) << ',' << format_metric(run.recall) << ','
                << format_metric(run.accuracy) << ',' << format_metric(run.average_precision)
                << '\n';
        }
    }
}

namespace {

struct Aggregate {
    std::string mean = "--";
    std::string variance = "--";
    std::string ci = "--";
};

Aggregate aggregate(const std::vector<metrics::Metric>& values) {
    Aggregate out;
    std::vector<double> defined;
    for (const auto& v : values) {
        if (v) defined.push_back(*v);
    }
    if (defined.size() != values.size() || defined.empty()) return out;  // dash on any undefined

    const double mean =
        std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
    std::ostringstream m;
    m.setf(std::ios::fixed);
    m.precision(3);
    m << mean;
    out.mean = m.str();

    if (defined.size() == 5) {
        const metrics::SeedSummary s = metrics::seed_summary(defined);
        std::ostringstream v, c;
        v.setf(std::ios::scientific);
        v.precision(2);
        v << s.sd * s.sd;
        out.variance = v.str();
        c.setf(std::ios::fixed);
        c.precision(3);
        c << s.ci_halfwidth;
        out.ci = c.str();
    } else if (defined.size() > 1) {
        double ss = 0.0;
        for (const double d : defined) ss += (d - mean) * (d - mean);
        std::ostringstream v;
        v.setf(std::ios::scientific);
        v.precision(2);
        v << ss / static_cast<double>(defined.size() - 1);
        out.variance = v.str();
        // the 2.776 multiplier is pinned to n=5; no CI otherwise
    }
    return out;
}

}  // namespace

void write_summary_markdown(const ExperimentReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write summary " + path.string());

    out << "# Triage metrics\n\n";
    out << "Mean and variance across seeds; CI half-width is 2.776 * SD (95%, n=5,"
           " Student's t). A dash marks an undefined metric or an unsupported seed count.\n\n";
    out << "| Model | F1 | F1 Var | F1 CI | Prec | Prec Var | Rec | Rec Var | Acc | Acc Var | AP |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& model : report.models) {
        std::vector<metrics::Metric> f1s, precs, recs, accs, aps;
        for (const auto& run : model.runs) {
            f1s.push_back(run.f1);
            precs.push_back(run.precision);
            recs.push_back(run.recall);
            accs.push_back(run.accuracy);
            aps.push_back(run.average_precision);
        }
        const Aggregate f1 = aggregate(f1s), prec = aggregate(precs), rec = aggregate(recs),
                        acc = aggregate(accs), ap = aggregate(aps);
        out << "| " << model.name << " | " << f1.mean << " | " << f1.variance << " | " << f1.ci
            << " | " << prec.mean << " | " << prec.variance << " | " << rec.mean << " | "
            << rec.variance << " | " << acc.mean << " | " << acc.variance << " | " << ap.mean
            << " |\n";
    }
}

}  // namespace flowtriage::experiment
