#include "xsum/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xsum/common.hpp"
#include "xsum/grad_check.hpp"
#include "xsum/pipeline.hpp"
#include "xsum/synth.hpp"

namespace xsum {

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir = "xsum-out";
    bool quiet = false;
};

struct Log {
    const Globals& g;
    template <class... T>
    void operator()(const T&... parts) const {
        if (g.quiet) return;
        std::ostringstream ss;
        ((ss << parts), ...);
        std::cerr << "xsum: " << ss.str() << '\n';
    }
};

void add_selection_options(CLI::App* cmd, std::size_t& k, double& tau, std::string& mode) {
    cmd->add_option("--k", k, "Sentences per summary in top-k mode")->capture_default_str();
    cmd->add_option("--select", mode, "Selection rule: topk or threshold")
        ->check(CLI::IsMember({"topk", "threshold"}))
        ->capture_default_str();
    cmd->add_option("--tau", tau, "Probability cutoff in threshold mode")->capture_default_str();
}

Selection make_selection(std::size_t k, double tau, const std::string& mode) {
    return Selection{mode == "threshold" ? SelectMode::threshold : SelectMode::topk, k, tau};
}

std::vector<std::size_t> parse_widths(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoul(item, &used);
            if (used != item.size() || v == 0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("bad hidden width list '" + s + "' (expected e.g. 50,50)");
        }
    }
    return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Extractive news summarization: prepare, train, summarize, evaluate"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Config file (TOML/INI, one [section] per command); flags win");
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random stream")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory receiving all outputs")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress progress logging");
    const Log log{g};

    // prepare
    auto* prep = app.add_subcommand("prepare", "Segment, embed and label a corpus");
    std::string corpus, embeddings_path, label_vectors = "embedding";
    double theta = kDefaultLabelThreshold, test_fraction = 0.2;
    std::size_t dim = kDefaultEmbeddingDim;
    bool all_bins = false;
    prep->add_option("--corpus", corpus, "JSON-Lines corpus")->required();
    prep->add_option("--embeddings", embeddings_path, "External embedding file (default: built-in TF-IDF)");
    prep->add_option("--label-vectors", label_vectors, "Vectors compared by the labeler: embedding or tfidf")
        ->check(CLI::IsMember({"embedding", "tfidf"}))
        ->capture_default_str();
    prep->add_option("--theta", theta, "Similarity threshold for positive labels")->capture_default_str();
    prep->add_option("--dim", dim, "Built-in embedding dimension")->capture_default_str();
    prep->add_option("--test-fraction", test_fraction, "Share of documents held out")->capture_default_str();
    prep->add_flag("--all-bins", all_bins, "Keep every density bin, not just extractive");

    // train
    auto* tr = app.add_subcommand("train", "Train a sentence classifier on a prepared corpus");
    std::string prepared = "", model_kind = "lstm-bi", hidden = "50,50", activation = "relu", features = "full",
                optimizer = "adam", name;
    std::size_t lstm_hidden = 50;
    TrainConfig tc;
    tr->add_option("--prepared", prepared, "Prepared directory")->required();
    tr->add_option("--model", model_kind, "logistic, ffnn, lstm-uni or lstm-bi")
        ->check(CLI::IsMember({"logistic", "ffnn", "lstm-uni", "lstm-bi"}))
        ->capture_default_str();
    tr->add_option("--hidden", hidden, "Feed-forward hidden widths")->capture_default_str();
    tr->add_option("--activation", activation, "Feed-forward activation: relu or tanh")
        ->check(CLI::IsMember({"relu", "tanh"}))
        ->capture_default_str();
    tr->add_option("--lstm-hidden", lstm_hidden, "LSTM hidden size per direction")->capture_default_str();
    tr->add_option("--features", features, "full or embedding-only")
        ->check(CLI::IsMember({"full", "embedding-only"}))
        ->capture_default_str();
    tr->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
    tr->add_option("--lr", tc.learning_rate, "Learning rate")->capture_default_str();
    tr->add_option("--optimizer", optimizer, "adam or sgd")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    tr->add_option("--batch", tc.batch, "Documents per optimizer step")->capture_default_str();
    tr->add_flag("--balance", tc.class_balance, "Weight classes inversely to their frequency");
    tr->add_option("--name", name, "Checkpoint file name (default: <model>.xsck)");

    // summarize
    auto* sum = app.add_subcommand("summarize", "Write extractive summaries");
    std::string method = "lede3", checkpoint, split = "test", select_mode = "topk";
    std::size_t k = 3;
    double tau = 0.5;
    sum->add_option("--prepared", prepared, "Prepared directory")->required();
    sum->add_option("--method", method, "lede3 or model")
        ->check(CLI::IsMember({"lede3", "model"}))
        ->capture_default_str();
    sum->add_option("--checkpoint", checkpoint, "Model checkpoint (method model)");
    sum->add_option("--split", split, "train, test or all")
        ->check(CLI::IsMember({"train", "test", "all"}))
        ->capture_default_str();
    add_selection_options(sum, k, tau, select_mode);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score one system against gold labels and references");
    ev->add_option("--prepared", prepared, "Prepared directory")->required();
    ev->add_option("--checkpoint", checkpoint, "Model checkpoint (default: LEDE3 baseline)");
    ev->add_option("--split", split, "train, test or all")
        ->check(CLI::IsMember({"train", "test", "all"}))
        ->capture_default_str();
    add_selection_options(ev, k, tau, select_mode);

    // compare
    auto* cmp = app.add_subcommand("compare", "Score several systems into one table (LEDE3 always included)");
    std::vector<std::string> systems;
    cmp->add_option("--prepared", prepared, "Prepared directory")->required();
    cmp->add_option("systems", systems, "Checkpoint paths or 'lede3', in row order");
    cmp->add_option("--split", split, "train, test or all")
        ->check(CLI::IsMember({"train", "test", "all"}))
        ->capture_default_str();
    add_selection_options(cmp, k, tau, select_mode);

    // gen-synth
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic corpus");
    std::string profile = "scattered", synth_out;
    SynthConfig sc;
    gen->add_option("--profile", profile, "lead_biased or scattered")
        ->check(CLI::IsMember({"lead_biased", "scattered"}))
        ->capture_default_str();
    gen->add_option("--documents", sc.documents, "Number of documents")->capture_default_str();
    gen->add_option("--out", synth_out, "Output file name under --out-dir (default: synth_<profile>.jsonl)");

    // grad-check
    auto* gc = app.add_subcommand("grad-check", "Compare analytic and numeric gradients on a random problem");
    std::size_t input_dim = 6, steps = 5, sequences = 2;
    double tolerance = 0.0;
    gc->add_option("--model", model_kind, "logistic, ffnn, lstm-uni or lstm-bi")
        ->check(CLI::IsMember({"logistic", "ffnn", "lstm-uni", "lstm-bi"}))
        ->capture_default_str();
    gc->add_option("--hidden", hidden, "Feed-forward hidden widths")->capture_default_str();
    gc->add_option("--activation", activation, "relu or tanh")
        ->check(CLI::IsMember({"relu", "tanh"}))
        ->capture_default_str();
    gc->add_option("--lstm-hidden", lstm_hidden, "LSTM hidden size per direction")->capture_default_str();
    gc->add_option("--input-dim", input_dim, "Feature width")->capture_default_str();
    gc->add_option("--steps", steps, "Sentences per sequence")->capture_default_str();
    gc->add_option("--sequences", sequences, "Sequences in the batch")->capture_default_str();
    gc->add_option("--tolerance", tolerance, "Exit 4 when the max relative error exceeds this (0: report only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::config_error);
    }

    const fs::path out_dir = g.out_dir;
    auto make_arch = [&] {
        Architecture a;
        a.kind = parse_model_kind(model_kind);
        a.activation = parse_activation(activation);
        if (a.kind == ModelKind::feed_forward) a.hidden = parse_widths(hidden);
        if (a.kind == ModelKind::lstm_uni || a.kind == ModelKind::lstm_bi) a.lstm_hidden = lstm_hidden;
        return a;
    };

    try {
        if (*prep) {
            PrepareOptions o;
            o.corpus = corpus;
            o.out_dir = out_dir;
            if (!embeddings_path.empty()) o.embeddings = fs::path(embeddings_path);
            o.label_vectors = parse_label_vectors(label_vectors);
            o.theta = theta;
            o.dim = dim;
            o.test_fraction = test_fraction;
            o.filter = all_bins ? DensityFilter::none : DensityFilter::extractive_only;
            o.seed = g.seed;
            const auto data = prepare(o);
            std::size_t sentences = 0, positives = 0;
            for (const auto& d : data.docs) {
                sentences += d.doc.sentences.size();
                for (const auto& l : d.labels) positives += static_cast<std::size_t>(l.label);
            }
            log("prepared ", data.docs.size(), " documents, ", sentences, " sentences, ", positives,
                " positive -> ", out_dir.string());
        } else if (*tr) {
            TrainOptions o;
            o.prepared = prepared;
            o.arch = make_arch();
            o.features = features == "full" ? FeatureSet::full : FeatureSet::embedding_only;
            tc.optimizer = optimizer == "adam" ? Optimizer::adam : Optimizer::sgd;
            tc.seed = g.seed;
            o.config = tc;
            o.checkpoint = out_dir / (name.empty() ? model_kind + ".xsck" : name);
            const auto outcome = train_command(o);
            const auto& losses = outcome.report.epoch_loss;
            log("trained ", system_label(outcome.checkpoint), " for ", losses.size(), " epochs, final loss ",
                losses.empty() ? 0.0 : losses.back(), ", checksum ", hex64(outcome.report.params_checksum), ", ",
                outcome.report.wall_seconds, " s -> ", o.checkpoint.string());
        } else if (*sum) {
            SummarizeOptions o;
            o.prepared = prepared;
            o.out = out_dir / "summaries.jsonl";
            o.method = method;
            if (!checkpoint.empty()) o.checkpoint = fs::path(checkpoint);
            o.split = parse_split(split);
            o.selection = make_selection(k, tau, select_mode);
            const auto results = summarize_command(o);
            log("wrote ", results.size(), " summaries -> ", o.out.string());
        } else if (*ev || *cmp) {
            CompareOptions o;
            o.prepared = prepared;
            o.out_dir = out_dir;
            o.split = parse_split(split);
            o.selection = make_selection(k, tau, select_mode);
            if (*ev) {
                o.systems = {checkpoint.empty() ? std::string("lede3") : checkpoint};
                o.include_lede3 = false;
            } else {
                o.systems = systems;
            }
            const auto rows = compare_command(o, *ev ? "evaluate" : "compare");
            if (!g.quiet) std::cout << format_table(rows);
        } else if (*gen) {
            sc.profile = parse_synth_profile(profile);
            sc.seed = g.seed;
            const fs::path path = out_dir / (synth_out.empty() ? "synth_" + profile + ".jsonl" : synth_out);
            const auto docs = generate_synthetic(sc);
            fs::create_directories(path.parent_path());
            write_synthetic(path, docs);
            log("wrote ", docs.size(), " ", profile, " documents -> ", path.string());
        } else if (*gc) {
            auto arch = make_arch();
            arch.input_dim = input_dim;
            const auto problem = random_problem(arch, sequences, steps, g.seed);
            const auto r = grad_check(problem.model, problem.batch);
            const nlohmann::json j{{"model", arch.label()},
                                   {"parameters", r.parameters},
                                   {"max_relative_error", r.max_relative_error},
                                   {"worst", r.worst}};
            std::cout << j.dump() << '\n';
            if (tolerance > 0.0 && !(r.max_relative_error < tolerance))
                throw NumericError("gradient check failed: max relative error " +
                                   std::to_string(r.max_relative_error) + " at " + r.worst);
        }
    } catch (const Error& e) {
        std::cerr << "xsum: error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "xsum: error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::data_error);
    }
    return 0;
}

}  // namespace xsum
