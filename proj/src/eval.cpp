#include "xsum/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>
#include <unordered_map>

#include "xsum/common.hpp"
#include "xsum/embed.hpp"

namespace xsum {

using nlohmann::json;

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> gold) {
    if (predicted.size() != gold.size())
        throw DataError("confusion: " + std::to_string(predicted.size()) + " predictions vs " +
                        std::to_string(gold.size()) + " labels");
    ConfusionCounts c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i])
            (predicted[i] ? c.tp : c.fn) += 1;
        else
            (predicted[i] ? c.fp : c.tn) += 1;
    }
    return c;
}

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }
}  // namespace

PrfScores prf(const ConfusionCounts& c) {
    PrfScores s;
    s.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    s.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    s.f1 = harmonic(s.precision, s.recall);
    return s;
}

RougeScore rouge_n(std::string_view system, std::string_view reference, int n) {
    RougeScore s{n};
    if (n < 1) throw ConfigError("ROUGE-N needs n >= 1");
    const auto sys = tokenize(system);
    const auto ref = tokenize(reference);
    const auto un = static_cast<std::size_t>(n);
    if (sys.size() < un || ref.size() < un) return s;

    auto count = [un](const std::vector<std::string>& toks) {
        std::unordered_map<std::string, std::size_t> grams;
        for (std::size_t i = 0; i + un <= toks.size(); ++i) {
            std::string key = toks[i];
            for (std::size_t k = 1; k < un; ++k) {
                key.push_back(' ');
                key += toks[i + k];
            }
            ++grams[key];
        }
        return grams;
    };
    const auto sys_grams = count(sys);
    const auto ref_grams = count(ref);
    std::size_t matched = 0;
    for (const auto& [gram, c] : ref_grams)
        if (auto it = sys_grams.find(gram); it != sys_grams.end()) matched += std::min(c, it->second);

    s.recall = static_cast<double>(matched) / static_cast<double>(ref.size() - un + 1);
    s.precision = static_cast<double>(matched) / static_cast<double>(sys.size() - un + 1);
    s.f1 = harmonic(s.precision, s.recall);
    return s;
}

void to_json(json& j, const EvalReport& r) {
    auto rouge = [](const RougeScore& s) { return json{{"f1", s.f1}, {"recall", s.recall}, {"precision", s.precision}}; };
    j = json{{"model", r.model},
             {"documents", r.documents},
             {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
             {"classification",
              {{"f1", r.classification.f1},
               {"recall", r.classification.recall},
               {"precision", r.classification.precision}}},
             {"rouge1", rouge(r.rouge1)},
             {"rouge2", rouge(r.rouge2)}};
}

EvalReport evaluate_corpus(const std::string& model, std::span<const DocPrediction> predictions,
                           std::span<const DocGold> gold) {
    std::map<std::string_view, const DocGold*> by_id;
    for (const auto& g : gold) by_id.emplace(g.doc_id, &g);

    std::vector<std::string> only_pred, only_gold;
    std::map<std::string_view, const DocPrediction*> pred_ids;
    for (const auto& p : predictions) {
        pred_ids.emplace(p.doc_id, &p);
        if (!by_id.count(p.doc_id)) only_pred.push_back(p.doc_id);
    }
    for (const auto& g : gold)
        if (!pred_ids.count(g.doc_id)) only_gold.push_back(g.doc_id);
    if (!only_pred.empty() || !only_gold.empty()) {
        std::string msg = "evaluate: documents not aligned;";
        auto list = [&msg](const char* side, const std::vector<std::string>& ids) {
            if (ids.empty()) return;
            msg += std::string(" only in ") + side + ":";
            for (const auto& id : ids) msg += " " + id;
            msg += ";";
        };
        list("predictions", only_pred);
        list("gold", only_gold);
        throw DataError(msg);
    }

    EvalReport r;
    r.model = model;
    r.documents = gold.size();
    for (const auto& g : gold) {
        const auto& p = *pred_ids.at(g.doc_id);
        r.counts += confusion(p.predicted, g.labels);
        for (int n : {1, 2}) {
            const auto s = rouge_n(p.summary, g.reference, n);
            auto& acc = n == 1 ? r.rouge1 : r.rouge2;
            acc.recall += s.recall;
            acc.precision += s.precision;
            acc.f1 += s.f1;
        }
    }
    r.classification = prf(r.counts);
    if (r.documents > 0) {
        const double docs = static_cast<double>(r.documents);
        for (auto* acc : {&r.rouge1, &r.rouge2}) {
            acc->recall /= docs;
            acc->precision /= docs;
            acc->f1 /= docs;
        }
    }
    return r;
}

std::string format_table(std::span<const EvalReport> rows) {
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.model.size());
    auto line = [width](std::string_view model, const std::string& a, const std::string& b, const std::string& c) {
        std::string s(model);
        s.resize(width + 2, ' ');
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-8s%-8s%s\n", a.c_str(), b.c_str(), c.c_str());
        return s + buf;
    };
    auto fmt = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };

    std::string out;
    auto block = [&](const char* title, auto pick) {
        out += title;
        out += "\n";
        out += line("Model", "F1", "Recall", "Precision");
        for (const auto& r : rows) {
            const auto [f1, recall, precision] = pick(r);
            out += line(r.model, fmt(f1), fmt(recall), fmt(precision));
        }
    };
    using Triple = std::tuple<double, double, double>;
    block("Sentence classification (micro-averaged)",
          [](const EvalReport& r) { return Triple{r.classification.f1, r.classification.recall, r.classification.precision}; });
    out += "\n";
    block("ROUGE-1 (mean over documents)",
          [](const EvalReport& r) { return Triple{r.rouge1.f1, r.rouge1.recall, r.rouge1.precision}; });
    out += "\n";
    block("ROUGE-2 (mean over documents)",
          [](const EvalReport& r) { return Triple{r.rouge2.f1, r.rouge2.recall, r.rouge2.precision}; });
    return out;
}

}  // namespace xsum
