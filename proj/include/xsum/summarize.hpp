#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xsum/corpus.hpp"

namespace xsum {

enum class SelectMode { topk, threshold };

struct Selection {
    SelectMode mode = SelectMode::topk;
    std::size_t k = 3;
    double tau = 0.5;

    void validate() const;
};

struct SummaryResult {
    std::string doc_id;
    std::vector<std::size_t> selected;  // strictly increasing
    std::vector<double> scores;         // empty for lede3
    std::string method;                 // "lede3" or "model:<label>"
};

void to_json(nlohmann::json& j, const SummaryResult& r);

// First three sentences, clipped to the document length.
SummaryResult lede3(const SegmentedDoc& doc);

// topk: the k best-scoring indices, ties to the earlier sentence, returned in
// document order. threshold: every index with score >= tau, which may be
// empty.
std::vector<std::size_t> select(std::span<const double> scores, const Selection& selection);

// select(), falling back to the single best sentence when the threshold
// admits nothing.
std::vector<std::size_t> select_nonempty(std::span<const double> scores, const Selection& selection);

SummaryResult summarize_scores(const SegmentedDoc& doc, std::span<const double> scores, const Selection& selection,
                               const std::string& model_label);

// Selected sentences joined with single spaces.
std::string render(const SegmentedDoc& doc, std::span<const std::size_t> selected);

}  // namespace xsum
