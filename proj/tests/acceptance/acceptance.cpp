// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../reference.hpp"
#include "../support.hpp"
#include "xsum/checkpoint.hpp"
#include "xsum/eval.hpp"
#include "xsum/grad_check.hpp"
#include "xsum/labeling.hpp"
#include "xsum/lstm.hpp"
#include "xsum/pipeline.hpp"
#include "xsum/synth.hpp"

using namespace xsum;
using xsum::testing::normal_vector;
using xsum::testing::read_file;
using xsum::testing::TempDir;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------------------

// Counts clipped matches with a map per side; shares nothing with the library
// except the tokenizer.
RougeScore oracle_rouge(const std::string& sys, const std::string& ref, int n) {
    auto grams = [n](const std::vector<std::string>& t) {
        std::map<std::vector<std::string>, int> m;
        for (std::size_t i = 0; i + n <= t.size(); ++i)
            ++m[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                         t.begin() + static_cast<std::ptrdiff_t>(i + n))];
        return m;
    };
    const auto ts = tokenize(sys), tr = tokenize(ref);
    RougeScore out{n};
    if (ts.size() < static_cast<std::size_t>(n) || tr.size() < static_cast<std::size_t>(n)) return out;
    const auto s = grams(ts), r = grams(tr);
    double match = 0;
    for (const auto& [g, c] : r)
        if (auto it = s.find(g); it != s.end()) match += std::min(c, it->second);
    out.recall = match / static_cast<double>(tr.size() - n + 1);
    out.precision = match / static_cast<double>(ts.size() - n + 1);
    out.f1 = out.recall + out.precision > 0 ? 2 * out.recall * out.precision / (out.recall + out.precision) : 0;
    return out;
}

void rouge_oracle() {
    const auto t0 = Clock::now();
    static const std::vector<std::string> vocab{"news", "the", "vote", "city", "of", "The", "Mayor", "a",
                                                "plan", "2001", "tax", "NEWS"};
    Rng rng(101);
    auto text = [&] {
        std::string s;
        const auto n = rng.below(25);
        for (std::uint64_t i = 0; i < n; ++i) s += vocab[rng.below(vocab.size())] + (rng.below(6) ? " " : ". ");
        return s;
    };
    std::size_t mismatches = 0;
    for (int pair = 0; pair < 1000; ++pair) {
        const auto sys = text(), ref = text();
        for (int n : {1, 2}) {
            const auto a = rouge_n(sys, ref, n), b = oracle_rouge(sys, ref, n);
            if (a.recall != b.recall || a.precision != b.precision || a.f1 != b.f1) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    report("rouge-oracle", mismatches == 0 && secs < 10.0,
           std::to_string(mismatches) + " mismatches over 1000 pairs x n={1,2}, " + fmt("%.2f s", secs));
}

// ---------------------------------------------------------------------------

void gradient_check() {
    const auto t0 = Clock::now();
    struct Case {
        Architecture arch;
        double bound;
        std::size_t steps;
    };
    std::vector<Case> cases;
    cases.push_back({{ModelKind::logistic, 6, {}, Activation::relu, 0}, 1e-6, 5});
    for (auto act : {Activation::tanh, Activation::relu})
        cases.push_back({{ModelKind::feed_forward, 6, {5, 4}, act, 0}, 1e-5, 5});
    for (auto kind : {ModelKind::lstm_uni, ModelKind::lstm_bi})
        for (std::size_t steps = 1; steps <= 6; ++steps)
            for (std::size_t hidden = 2; hidden <= 8; ++hidden) cases.push_back({{kind, 4, {}, Activation::relu, hidden}, 1e-4, steps});

    std::size_t failed = 0;
    std::map<std::string, double> worst;
    std::uint64_t seed = 1;
    for (const auto& c : cases) {
        const auto problem = random_problem(c.arch, 2, c.steps, seed++);
        const auto r = grad_check(problem.model, problem.batch);
        const std::string kind(to_string(c.arch.kind));
        worst[kind] = std::max(worst[kind], r.max_relative_error);
        if (!(r.max_relative_error < c.bound)) ++failed;
    }
    const double secs = seconds_since(t0);
    std::string detail = std::to_string(cases.size()) + " configs, max rel err";
    for (const auto& [k, v] : worst) detail += " " + k + "=" + fmt("%.1e", v);
    report("gradient-check", failed == 0 && secs < 60.0, detail + ", " + fmt("%.2f s", secs));
}

// ---------------------------------------------------------------------------

void lstm_cell_equations() {
    Rng rng(7);
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const auto n = 1 + rng.below(8), d = 1 + rng.below(8);
        Model m(Architecture{ModelKind::lstm_uni, n, {}, Activation::relu, d});
        for (double& v : m.params()) v = 0.5 * rng.normal();
        const auto& p = m.lstm().forward;
        const auto x = normal_vector(rng, n), h = normal_vector(rng, d), c = normal_vector(rng, d);
        const auto got = lstm_cell(p, x, h, c);
        const auto want = reference::lstm_cell(p, x, h, c);
        for (std::size_t k = 0; k < d; ++k)
            for (double diff : {got.forget[k] - want.f[k], got.input[k] - want.i[k], got.candidate[k] - want.g[k],
                                got.output[k] - want.o[k], got.cell[k] - want.c[k], got.hidden[k] - want.h[k]})
                worst = std::max(worst, std::abs(diff));
    }
    report("lstm-cell", worst <= 1e-12, "100 draws, max abs diff " + fmt("%.1e", worst));
}

// ---------------------------------------------------------------------------

double brute_cosine(const std::vector<double>& u, const std::vector<double>& v) {
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    return uu == 0 || vv == 0 ? 0.0 : uv / std::sqrt(uu * vv);
}

void labeling_oracle() {
    Rng rng(31);
    std::size_t label_mismatch = 0, monotone_violations = 0;
    double worst_sim = 0.0;
    const std::vector<double> sweep{0.5, 0.6, 0.7, 0.8, 0.9};
    for (int inst = 0; inst < 500; ++inst) {
        const auto dim = 2 + rng.below(7);
        const auto n = 1 + rng.below(10), m = 1 + rng.below(5);
        std::vector<std::vector<double>> art, sum;
        for (std::uint64_t i = 0; i < n; ++i) art.push_back(normal_vector(rng, dim));
        for (std::uint64_t j = 0; j < m; ++j) sum.push_back(normal_vector(rng, dim));
        if (rng.below(2) == 0) art[rng.below(n)] = sum[rng.below(m)];
        const double theta = rng.uniform(0.0, 1.0);

        const auto labels = label_document(art, sum, theta);
        for (std::uint64_t i = 0; i < n; ++i) {
            double best = -2.0;
            for (std::uint64_t j = 0; j < m; ++j) best = std::max(best, brute_cosine(art[i], sum[j]));
            if (labels[i].label != (best >= theta ? 1 : 0) || labels[i].index != i) ++label_mismatch;
            worst_sim = std::max(worst_sim, std::abs(labels[i].max_similarity - best));
        }

        std::vector<int> prev(n, 1);
        for (double t : sweep) {
            const auto l = label_document(art, sum, t);
            for (std::uint64_t i = 0; i < n; ++i) {
                if (l[i].label > prev[i]) ++monotone_violations;
                prev[i] = l[i].label;
            }
        }
    }
    report("labeling-oracle", label_mismatch == 0 && worst_sim <= 1e-12 && monotone_violations == 0,
           "500 instances, " + std::to_string(label_mismatch) + " label mismatches, max sim diff " +
               fmt("%.1e", worst_sim) + ", " + std::to_string(monotone_violations) + " monotonicity violations");
}

// ---------------------------------------------------------------------------

PreparedData prepare_synthetic(const fs::path& dir, SynthProfile profile) {
    SynthConfig sc;
    sc.profile = profile;
    write_synthetic(dir / "corpus.jsonl", generate_synthetic(sc));
    PrepareOptions po;
    po.corpus = dir / "corpus.jsonl";
    po.out_dir = dir / "prepared";
    return prepare(po);
}

Architecture arch_of(ModelKind kind) {
    switch (kind) {
        case ModelKind::logistic: return {kind, 0, {}, Activation::relu, 0};
        case ModelKind::feed_forward: return {kind, 0, {50, 50}, Activation::relu, 0};
        default: return {kind, 0, {}, Activation::relu, 50};
    }
}

void training_and_ordering(const fs::path& root) {
    const auto t0 = Clock::now();
    const auto data = prepare_synthetic(root / "scattered", SynthProfile::scattered);
    const TrainConfig config;  // defaults: Adam, 50 epochs, batch 8

    bool sane = true, deterministic = true;
    std::string detail;
    std::optional<Checkpoint> lstm;
    for (auto kind : {ModelKind::logistic, ModelKind::feed_forward, ModelKind::lstm_bi}) {
        auto a = train_prepared(data, arch_of(kind), FeatureSet::full, config);
        const auto b = train_prepared(data, arch_of(kind), FeatureSet::full, config);
        const auto& loss = a.report.epoch_loss;
        const bool ok = loss.size() >= 10 && loss[9] < loss[0];
        const auto hash_a = fnv1a64(encode_checkpoint(a.checkpoint));
        const auto hash_b = fnv1a64(encode_checkpoint(b.checkpoint));
        sane = sane && ok;
        deterministic = deterministic && hash_a == hash_b;
        detail += std::string(to_string(kind)) + " " + fmt("%.4f", loss[0]) + "->" + fmt("%.4f", loss[9]) +
                  (hash_a == hash_b ? " hash=" + hex64(hash_a) : " hash mismatch") + "; ";
        if (kind == ModelKind::lstm_bi) lstm = std::move(a.checkpoint);
    }
    report("training-sanity", sane && deterministic, detail);

    const auto gold = gold_for(data, Split::test);
    const auto lstm_eval = evaluate_corpus("LSTM Bi 50", run_model(*lstm, data, Split::test, {}).predictions, gold);
    const auto lede_eval = evaluate_corpus("LEDE3", run_lede3(data, Split::test).predictions, gold);

    // Lede-3 against the positional base rate, over every document.
    const auto all_gold = gold_for(data, Split::all);
    const auto lede_all = evaluate_corpus("LEDE3", run_lede3(data, Split::all).predictions, all_gold);
    std::size_t positives = 0, sentences = 0;
    for (const auto& g : all_gold) {
        sentences += g.labels.size();
        positives += static_cast<std::size_t>(std::count(g.labels.begin(), g.labels.end(), 1));
    }
    const double base = static_cast<double>(positives) / static_cast<double>(sentences);
    const double selections = static_cast<double>(lede_all.counts.tp + lede_all.counts.fp);
    const double band = 3.0 * std::sqrt(base * (1.0 - base) / selections);
    const double lede_f1 = lede_all.classification.f1;
    const double secs = seconds_since(t0);

    const double f1 = lstm_eval.classification.f1;
    const bool ok = f1 >= 0.9 && f1 > lede_eval.classification.f1 && std::abs(lede_f1 - base) <= band && secs < 300.0;
    report("ordering", ok,
           "LSTM Bi 50 F1 " + fmt("%.3f", f1) + " vs LEDE3 " + fmt("%.3f", lede_eval.classification.f1) +
               " (test split); LEDE3 F1 " + fmt("%.3f", lede_f1) + " vs base rate " + fmt("%.3f", base) + " +/- " +
               fmt("%.3f", band) + " (all docs); " + fmt("%.1f s", secs));
}

void lead_bias(const fs::path& root) {
    const auto data = prepare_synthetic(root / "lead", SynthProfile::lead_biased);
    const auto gold = gold_for(data, Split::all);
    const auto r = evaluate_corpus("LEDE3", run_lede3(data, Split::all).predictions, gold);
    report("lead-bias", r.rouge1.recall >= 0.9, "LEDE3 ROUGE-1 recall " + fmt("%.3f", r.rouge1.recall));
}

// ---------------------------------------------------------------------------

void format_round_trips(const fs::path& root) {
    bool ok = true;
    std::string detail;

    const auto data = load_prepared(root / "scattered" / "prepared");
    const auto xsem = encode_embeddings(data.embeddings);
    save_embeddings(root / "copy.xsem", data.embeddings);
    const auto reloaded = load_embeddings(root / "copy.xsem");
    const bool xsem_ok = reloaded == data.embeddings && encode_embeddings(reloaded) == xsem &&
                         read_file(root / "copy.xsem") == read_file(root / "scattered" / "prepared" / "embeddings.xsem");
    ok = ok && xsem_ok;
    detail += std::string("xsem ") + (xsem_ok ? "bit-exact" : "differs");

    TrainConfig cfg;
    cfg.epochs = 2;
    for (auto kind : {ModelKind::logistic, ModelKind::feed_forward, ModelKind::lstm_uni, ModelKind::lstm_bi}) {
        const auto o = train_prepared(data, arch_of(kind), FeatureSet::full, cfg);
        const auto path = root / (std::string(to_string(kind)) + ".xsck");
        save_checkpoint(path, o.checkpoint);
        const auto back = load_checkpoint(path);
        const auto& p = o.checkpoint.model.params();
        const auto& q = back.model.params();
        const bool same = p.size() == q.size() && std::memcmp(p.data(), q.data(), p.size() * sizeof(double)) == 0 &&
                          encode_checkpoint(back) == encode_checkpoint(o.checkpoint);
        ok = ok && same;
        if (!same) detail += std::string(", checkpoint ") + std::string(to_string(kind)) + " differs";
    }
    detail += ", checkpoints";
    if (ok) detail += " bit-exact";

    SynthConfig sc;
    write_synthetic(root / "rerun.jsonl", generate_synthetic(sc));
    PrepareOptions po;
    po.corpus = root / "rerun.jsonl";
    po.out_dir = root / "rerun";
    prepare(po);
    for (const auto* f : {kSegmentedFile.data(), kEmbeddingsFile.data(), kIdfFile.data(), kLabelsFile.data()}) {
        const bool same = read_file(root / "rerun" / f) == read_file(root / "scattered" / "prepared" / f);
        ok = ok && same;
        if (!same) detail += std::string(", ") + f + " differs";
    }
    // stats.json records the corpus path, which differs between the two runs.
    auto stats_a = nlohmann::json::parse(read_file(root / "rerun" / std::string(kStatsFile)));
    auto stats_b = nlohmann::json::parse(read_file(root / "scattered" / "prepared" / std::string(kStatsFile)));
    stats_a["config"].erase("corpus");
    stats_b["config"].erase("corpus");
    ok = ok && stats_a == stats_b;
    detail += stats_a == stats_b ? ", prepared outputs identical" : ", stats differ";
    report("format-round-trips", ok, detail);
}

void guarded(const std::string& name, const std::function<void()>& check) {
    try {
        check();
    } catch (const std::exception& e) {
        report(name, false, std::string("threw: ") + e.what());
    }
}

}  // namespace

int main() {
    TempDir root("acceptance");
    std::printf("kernels: %s\n", std::string(kernels::active().name).c_str());
    guarded("rouge-oracle", rouge_oracle);
    guarded("gradient-check", gradient_check);
    guarded("lstm-cell", lstm_cell_equations);
    guarded("labeling-oracle", labeling_oracle);
    guarded("training/ordering", [&] { training_and_ordering(root.path()); });
    guarded("lead-bias", [&] { lead_bias(root.path()); });
    guarded("format-round-trips", [&] { format_round_trips(root.path()); });
    std::printf("%s: %d failing\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
