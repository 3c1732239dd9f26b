#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xsum {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);
    bool operator==(const ConfusionCounts&) const = default;
};

// Throws DataError on a length mismatch.
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> gold);

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// P = TP / (TP + FP), R = TP / (TP + FN), F1 = 2PR / (P + R); a zero
// denominator yields 0.
PrfScores prf(const ConfusionCounts& c);

struct RougeScore {
    int n = 1;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

// ROUGE-N against a single reference: clipped n-gram matches over reference
// n-grams (recall) and over system n-grams (precision). Tokens are lowercased
// alphanumeric runs with no stemming or stopword removal. When either side
// has fewer than n tokens the score is all zeros.
RougeScore rouge_n(std::string_view system, std::string_view reference, int n);

struct DocPrediction {
    std::string doc_id;
    std::vector<int> predicted;  // per-sentence 0/1
    std::string summary;         // rendered system summary
};

struct DocGold {
    std::string doc_id;
    std::vector<int> labels;
    std::string reference;
};

struct EvalReport {
    std::string model;
    std::size_t documents = 0;
    ConfusionCounts counts;      // micro-aggregated over sentences
    PrfScores classification;
    RougeScore rouge1{1};        // mean over documents
    RougeScore rouge2{2};
};

void to_json(nlohmann::json& j, const EvalReport& r);

// Pairs predictions with gold by doc_id. Throws DataError listing ids present
// on only one side, or documents whose sentence counts disagree.
EvalReport evaluate_corpus(const std::string& model, std::span<const DocPrediction> predictions,
                           std::span<const DocGold> gold);

// Aligned plain-text tables with columns Model | F1 | Recall | Precision, one
// block per metric family.
std::string format_table(std::span<const EvalReport> rows);

}  // namespace xsum
