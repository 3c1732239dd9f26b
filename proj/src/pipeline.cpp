#include "xsum/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "xsum/common.hpp"

namespace xsum {

using nlohmann::json;

LabelVectors parse_label_vectors(std::string_view s) {
    if (s == "embedding") return LabelVectors::embedding;
    if (s == "tfidf") return LabelVectors::tfidf;
    throw ConfigError("unknown label vectors '" + std::string(s) + "' (expected embedding or tfidf)");
}

std::string_view to_string(LabelVectors v) { return v == LabelVectors::embedding ? "embedding" : "tfidf"; }

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    if (s == "all") return Split::all;
    throw ConfigError("unknown split '" + std::string(s) + "' (expected train, test or all)");
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::all: return "all";
    }
    return "all";
}

void PrepareOptions::validate() const {
    if (!(theta >= -1.0 && theta <= 1.0)) throw ConfigError("--theta must lie in [-1, 1]");
    if (!embeddings && dim < kMinEmbeddingDim)
        throw ConfigError("--dim must be at least " + std::to_string(kMinEmbeddingDim));
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in [0, 1)");
    if (!fs::is_regular_file(corpus)) throw DataError("corpus file not found: " + corpus.string());
    if (embeddings && !fs::is_regular_file(*embeddings))
        throw DataError("embedding file not found: " + embeddings->string());
    if (out_dir.empty()) throw ConfigError("an output directory is required");
}

json PrepareOptions::to_json() const {
    return json{{"corpus", corpus.generic_string()},
                {"embeddings", embeddings ? json(embeddings->generic_string()) : json(nullptr)},
                {"label_vectors", to_string(label_vectors)},
                {"theta", theta},
                {"dim", dim},
                {"test_fraction", test_fraction},
                {"filter", filter == DensityFilter::extractive_only ? "extractive" : "none"},
                {"seed", seed}};
}

std::vector<const PreparedDoc*> PreparedData::select(Split split) const {
    std::vector<const PreparedDoc*> out;
    for (const auto& d : docs)
        if (split == Split::all || (split == Split::test) == d.test) out.push_back(&d);
    return out;
}

namespace {

std::vector<std::string> doc_tokens(const SegmentedDoc& d) {
    std::vector<std::string> out;
    for (const auto& s : d.sentences) {
        auto t = tokenize(s);
        out.insert(out.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    return out;
}

// Exact TF-IDF vectors over the document's own vocabulary.
std::pair<std::vector<std::vector<double>>, std::vector<std::vector<double>>> tfidf_vectors(
    const SegmentedDoc& d, const IdfTable& idf) {
    std::map<std::string, std::size_t> vocab;
    auto index = [&](const std::vector<std::string>& sentences) {
        for (const auto& s : sentences)
            for (auto& t : tokenize(s)) vocab.emplace(std::move(t), vocab.size());
    };
    index(d.sentences);
    index(d.summary_sentences);
    auto vectors = [&](const std::vector<std::string>& sentences) {
        std::vector<std::vector<double>> out;
        for (const auto& s : sentences) {
            std::vector<double> v(vocab.size(), 0.0);
            for (const auto& t : tokenize(s)) v[vocab.at(t)] += idf.idf(t);
            out.push_back(std::move(v));
        }
        return out;
    };
    return {vectors(d.sentences), vectors(d.summary_sentences)};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing prepared file: " + path.string() + " (run `xsum prepare` first)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const fs::path& path) {
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("invalid JSON in " + path.string());
    return j;
}

std::string join_sentences(const std::vector<std::string>& s) {
    std::string out;
    for (const auto& x : s) {
        if (!out.empty()) out.push_back(' ');
        out += x;
    }
    return out;
}

}  // namespace

PreparedData build_prepared(const PrepareOptions& options) {
    options.validate();
    PreparedData data;
    data.theta = options.theta;

    for (auto& rec : load_corpus(options.corpus, options.filter, &data.load))
        data.docs.push_back(PreparedDoc{segment(rec), false, {}});
    if (data.docs.empty())
        throw DataError("corpus yielded no documents: " + options.corpus.string() + " (" +
                        json(data.load).dump() + ")");

    const std::size_t n = data.docs.size();
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * options.test_fraction));
    n_test = std::min(n_test, n - 1);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto rng = Rng::derive(options.seed, "split");
    rng.shuffle(order.begin(), order.end());
    for (std::size_t i = 0; i < n_test; ++i) data.docs[order[i]].test = true;

    std::vector<std::vector<std::string>> train_tokens;
    for (const auto& d : data.docs)
        if (!d.test) train_tokens.push_back(doc_tokens(d.doc));
    data.idf = IdfTable::build(train_tokens);

    if (options.embeddings) {
        data.embeddings = load_embeddings(*options.embeddings);
    } else {
        data.embeddings = EmbeddingTable(options.dim, EmbeddingSource::builtin_tfidf);
        for (const auto& d : data.docs) {
            for (std::size_t i = 0; i < d.doc.sentences.size(); ++i)
                data.embeddings.put(d.doc.doc_id, static_cast<std::uint32_t>(i),
                                    embed_builtin(d.doc.sentences[i], options.dim, data.idf));
            const auto key = summary_key(d.doc.doc_id);
            for (std::size_t j = 0; j < d.doc.summary_sentences.size(); ++j)
                data.embeddings.put(key, static_cast<std::uint32_t>(j),
                                    embed_builtin(d.doc.summary_sentences[j], options.dim, data.idf));
        }
    }

    for (auto& d : data.docs) {
        const auto article = data.embeddings.document(d.doc.doc_id, d.doc.sentences.size());
        const auto summary = data.embeddings.document(summary_key(d.doc.doc_id), d.doc.summary_sentences.size());
        if (options.label_vectors == LabelVectors::embedding) {
            d.labels = label_document(article, summary, options.theta);
        } else {
            const auto [a, s] = tfidf_vectors(d.doc, data.idf);
            d.labels = label_document(a, s, options.theta);
        }
    }
    return data;
}

void write_prepared(const PreparedData& data, const PrepareOptions& options) {
    std::string segmented, labels;
    std::size_t sentences = 0, positives = 0, test_docs = 0;
    json counts = json::array();
    for (const auto& d : data.docs) {
        json s = d.doc;
        s["split"] = d.test ? "test" : "train";
        segmented += s.dump() + "\n";

        json l{{"doc_id", d.doc.doc_id}, {"labels", json::array()}, {"max_similarity", json::array()}};
        for (const auto& ls : d.labels) {
            l["labels"].push_back(ls.label);
            l["max_similarity"].push_back(ls.max_similarity);
            positives += static_cast<std::size_t>(ls.label);
        }
        labels += l.dump() + "\n";
        sentences += d.doc.sentences.size();
        test_docs += d.test ? 1 : 0;
        counts.push_back(d.doc.sentences.size());
    }
    const json stats{{"config", options.to_json()},
                     {"load", data.load},
                     {"documents", data.docs.size()},
                     {"train_documents", data.docs.size() - test_docs},
                     {"test_documents", test_docs},
                     {"sentences", sentences},
                     {"positives", positives},
                     {"positive_rate", sentences ? static_cast<double>(positives) / static_cast<double>(sentences) : 0.0},
                     {"sentence_counts", counts},
                     {"embedding_dim", data.embeddings.dim()},
                     {"embedding_source",
                      data.embeddings.source() == EmbeddingSource::builtin_tfidf ? "builtin_tfidf" : "external_file"},
                     {"idf_fingerprint", hex64(data.idf.fingerprint())}};

    fs::create_directories(options.out_dir);
    const std::vector<std::pair<std::string_view, std::string>> files{
        {kSegmentedFile, segmented},
        {kIdfFile, json(data.idf).dump() + "\n"},
        {kLabelsFile, labels},
        {kStatsFile, stats.dump(2) + "\n"}};
    std::vector<fs::path> staged;
    for (const auto& [name, text] : files) {
        staged.push_back(options.out_dir / (std::string(name) + ".tmp"));
        write_text(staged.back(), text);
    }
    staged.push_back(options.out_dir / (std::string(kEmbeddingsFile) + ".tmp"));
    save_embeddings(staged.back(), data.embeddings);
    for (const auto& tmp : staged) {
        auto final_path = tmp;
        final_path.replace_extension();
        fs::rename(tmp, final_path);
    }
}

PreparedData prepare(const PrepareOptions& options) {
    auto data = build_prepared(options);
    write_prepared(data, options);
    return data;
}

PreparedData load_prepared(const fs::path& dir) {
    PreparedData data;
    const auto stats = parse_json(read_text(dir / kStatsFile), dir / kStatsFile);
    const auto idf_json = parse_json(read_text(dir / kIdfFile), dir / kIdfFile);
    try {
        data.theta = stats.at("config").at("theta").get<double>();
        data.idf = idf_json.get<IdfTable>();
        const auto& load = stats.at("load");
        data.load = LoadReport{load.at("lines"), load.at("yielded"), load.at("filtered"), load.at("malformed"),
                               load.at("empty")};
    } catch (const json::exception& e) {
        throw DataError("malformed prepared metadata in " + dir.string() + ": " + e.what());
    }

    const auto seg_path = dir / kSegmentedFile;
    const auto lab_path = dir / kLabelsFile;
    std::istringstream seg(read_text(seg_path)), lab(read_text(lab_path));
    std::string seg_line, lab_line;
    while (std::getline(seg, seg_line)) {
        if (!std::getline(lab, lab_line)) throw DataError(lab_path.string() + " has fewer lines than " + seg_path.string());
        try {
            const auto s = parse_json(seg_line, seg_path);
            const auto l = parse_json(lab_line, lab_path);
            PreparedDoc d{s.get<SegmentedDoc>(), s.at("split").get<std::string>() == "test", {}};
            if (l.at("doc_id").get<std::string>() != d.doc.doc_id)
                throw DataError("labels out of step with segments at " + d.doc.doc_id);
            const auto& ys = l.at("labels");
            const auto& sims = l.at("max_similarity");
            if (ys.size() != d.doc.sentences.size() || sims.size() != ys.size())
                throw DataError("label count mismatch for " + d.doc.doc_id);
            for (std::size_t i = 0; i < ys.size(); ++i)
                d.labels.push_back(LabeledSentence{i, ys[i].get<int>(), sims[i].get<double>()});
            data.docs.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw DataError("malformed prepared record in " + dir.string() + ": " + e.what());
        }
    }
    data.embeddings = load_embeddings(dir / kEmbeddingsFile);
    return data;
}

json TrainOptions::to_json() const {
    return json{{"prepared", prepared.generic_string()},
                {"checkpoint", checkpoint.generic_string()},
                {"architecture", arch},
                {"features", features == FeatureSet::full ? "full" : "embedding-only"},
                {"train_config", config}};
}

PositionScaler fit_scaler(const PreparedData& data) {
    std::vector<std::size_t> positions;
    for (const auto* d : data.select(Split::train))
        for (std::size_t i = 0; i < d->doc.sentences.size(); ++i) positions.push_back(i);
    return PositionScaler::fit(positions);
}

FeatureSpec feature_spec(const PreparedData& data, FeatureSet set) {
    FeatureSpec spec;
    spec.set = set;
    spec.embedding_dim = data.embeddings.dim();
    spec.source = data.embeddings.source();
    spec.scaler = fit_scaler(data);
    spec.idf_fingerprint = data.idf.fingerprint();
    spec.label_threshold = data.theta;
    return spec;
}

LabeledSequence make_sequence(const PreparedDoc& doc, const EmbeddingTable& table, const FeatureSpec& spec) {
    LabeledSequence seq;
    seq.doc_id = doc.doc.doc_id;
    const auto features = featurize(doc.doc.doc_id, doc.doc.sentences.size(), table);
    seq.features = feature_matrix(features, spec.set, spec.scaler);
    for (const auto& l : doc.labels) seq.labels.push_back(l.label);
    return seq;
}

TrainOutcome train_prepared(const PreparedData& data, Architecture arch, FeatureSet features,
                            const TrainConfig& config) {
    const auto spec = feature_spec(data, features);
    arch.input_dim = feature_width(features, spec.embedding_dim);
    std::vector<LabeledSequence> sequences;
    for (const auto* d : data.select(Split::train)) sequences.push_back(make_sequence(*d, data.embeddings, spec));
    auto result = train(arch, sequences, config);
    round_to_float32(result.model.params());
    return TrainOutcome{Checkpoint{std::move(result.model), spec, config}, std::move(result.report)};
}

TrainOutcome train_command(const TrainOptions& options) {
    if (options.checkpoint.empty()) throw ConfigError("train needs an output checkpoint path");
    options.config.validate();
    const auto data = load_prepared(options.prepared);
    auto outcome = train_prepared(data, options.arch, options.features, options.config);
    if (options.checkpoint.has_parent_path()) fs::create_directories(options.checkpoint.parent_path());
    save_checkpoint(options.checkpoint, outcome.checkpoint);
    json report = outcome.report;
    report["config"] = options.to_json();
    report["label"] = system_label(outcome.checkpoint);
    write_text(options.checkpoint.string() + ".report.json", report.dump(2) + "\n");
    return outcome;
}

void check_compatible(const Checkpoint& ckpt, const PreparedData& data) {
    const auto& f = ckpt.features;
    if (f.embedding_dim != data.embeddings.dim())
        throw ConfigError("checkpoint expects embedding dim " + std::to_string(f.embedding_dim) +
                          " but the prepared data has " + std::to_string(data.embeddings.dim()));
    if (f.idf_fingerprint != data.idf.fingerprint())
        throw ConfigError("checkpoint idf fingerprint " + hex64(f.idf_fingerprint) +
                          " does not match the prepared data (" + hex64(data.idf.fingerprint()) + ")");
    if (f.source != data.embeddings.source())
        throw ConfigError("checkpoint and prepared data use different embedding sources");
}

std::string system_label(const Checkpoint& ckpt) {
    std::string label = ckpt.model.architecture().label();
    if (ckpt.train_config.class_balance) label += " Bal";
    if (ckpt.features.set == FeatureSet::embedding_only) label += " Def";
    return label;
}

SystemOutput run_lede3(const PreparedData& data, Split split) {
    SystemOutput out{"LEDE3", {}, {}};
    for (const auto* d : data.select(split)) {
        auto r = lede3(d->doc);
        std::vector<int> predicted(d->doc.sentences.size(), 0);
        for (auto i : r.selected) predicted[i] = 1;
        out.predictions.push_back(DocPrediction{d->doc.doc_id, std::move(predicted), render(d->doc, r.selected)});
        out.summaries.push_back(std::move(r));
    }
    return out;
}

SystemOutput run_model(const Checkpoint& ckpt, const PreparedData& data, Split split, const Selection& selection) {
    check_compatible(ckpt, data);
    SystemOutput out{system_label(ckpt), {}, {}};
    for (const auto* d : data.select(split)) {
        const auto seq = make_sequence(*d, data.embeddings, ckpt.features);
        const auto probs = ckpt.model.predict(seq.features.view());
        std::vector<int> predicted;
        for (double p : probs) predicted.push_back(p >= 0.5 ? 1 : 0);
        auto r = summarize_scores(d->doc, probs, selection, out.label);
        out.predictions.push_back(DocPrediction{d->doc.doc_id, std::move(predicted), render(d->doc, r.selected)});
        out.summaries.push_back(std::move(r));
    }
    return out;
}

std::vector<DocGold> gold_for(const PreparedData& data, Split split) {
    std::vector<DocGold> gold;
    for (const auto* d : data.select(split)) {
        DocGold g{d->doc.doc_id, {}, join_sentences(d->doc.summary_sentences)};
        for (const auto& l : d->labels) g.labels.push_back(l.label);
        gold.push_back(std::move(g));
    }
    return gold;
}

std::vector<EvalReport> compare_command(const CompareOptions& options, std::string_view stem) {
    options.selection.validate();
    if (options.systems.empty() && !options.include_lede3) throw ConfigError("no systems to evaluate");
    std::vector<std::string> systems = options.systems;
    if (options.include_lede3 && std::find(systems.begin(), systems.end(), "lede3") == systems.end())
        systems.insert(systems.begin(), "lede3");
    for (const auto& s : systems)
        if (s != "lede3" && !fs::is_regular_file(s)) throw DataError("checkpoint not found: " + s);

    const auto data = load_prepared(options.prepared);
    const auto gold = gold_for(data, options.split);
    std::vector<EvalReport> rows;
    for (const auto& s : systems) {
        const auto output =
            s == "lede3" ? run_lede3(data, options.split)
                         : run_model(load_checkpoint(s), data, options.split, options.selection);
        rows.push_back(evaluate_corpus(output.label, output.predictions, gold));
    }

    json report{{"split", to_string(options.split)},
                {"systems", systems},
                {"classification_cutoff", 0.5},
                {"selection_k", options.selection.k},
                {"rows", rows}};
    fs::create_directories(options.out_dir);
    write_text(options.out_dir / (std::string(stem) + ".json"), report.dump(2) + "\n");
    write_text(options.out_dir / (std::string(stem) + ".txt"), format_table(rows));
    return rows;
}

std::vector<SummaryResult> summarize_command(const SummarizeOptions& options) {
    options.selection.validate();
    if (options.method != "lede3" && options.method != "model")
        throw ConfigError("unknown summarization method '" + options.method + "' (expected lede3 or model)");
    if (options.method == "model" && !options.checkpoint)
        throw ConfigError("--method model needs --checkpoint");
    const auto data = load_prepared(options.prepared);
    const auto output = options.method == "lede3"
                            ? run_lede3(data, options.split)
                            : run_model(load_checkpoint(*options.checkpoint), data, options.split, options.selection);

    std::string text;
    const auto docs = data.select(options.split);
    for (std::size_t i = 0; i < output.summaries.size(); ++i) {
        json j = output.summaries[i];
        j["summary"] = render(docs[i]->doc, output.summaries[i].selected);
        text += j.dump() + "\n";
    }
    if (options.out.has_parent_path()) fs::create_directories(options.out.parent_path());
    write_text(options.out, text);
    return output.summaries;
}

}  // namespace xsum
