#include "xsum/summarize.hpp"

#include <algorithm>
#include <numeric>

#include "xsum/common.hpp"

namespace xsum {

using nlohmann::json;

void Selection::validate() const {
    if (mode == SelectMode::topk && k < 1) throw ConfigError("top-k selection needs k >= 1");
    if (mode == SelectMode::threshold && !(tau > 0.0 && tau < 1.0))
        throw ConfigError("threshold selection needs tau in (0, 1)");
}

void to_json(json& j, const SummaryResult& r) {
    j = json{{"doc_id", r.doc_id}, {"selected", r.selected}, {"scores", r.scores}, {"method", r.method}};
}

SummaryResult lede3(const SegmentedDoc& doc) {
    SummaryResult r{doc.doc_id, {}, {}, "lede3"};
    for (std::size_t i = 0; i < std::min<std::size_t>(3, doc.sentences.size()); ++i) r.selected.push_back(i);
    return r;
}

std::vector<std::size_t> select(std::span<const double> scores, const Selection& selection) {
    selection.validate();
    std::vector<std::size_t> out;
    if (selection.mode == SelectMode::threshold) {
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= selection.tau) out.push_back(i);
        return out;
    }
    out.resize(scores.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    out.resize(std::min(selection.k, out.size()));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> select_nonempty(std::span<const double> scores, const Selection& selection) {
    auto out = select(scores, selection);
    if (out.empty() && !scores.empty()) out = select(scores, Selection{SelectMode::topk, 1, 0.5});
    return out;
}

SummaryResult summarize_scores(const SegmentedDoc& doc, std::span<const double> scores, const Selection& selection,
                               const std::string& model_label) {
    if (scores.size() != doc.sentences.size())
        throw DataError("summarize: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(doc.sentences.size()) + " sentences in " + doc.doc_id);
    return {doc.doc_id, select_nonempty(scores, selection), {scores.begin(), scores.end()}, "model:" + model_label};
}

std::string render(const SegmentedDoc& doc, std::span<const std::size_t> selected) {
    std::string out;
    for (auto i : selected) {
        if (!out.empty()) out.push_back(' ');
        out += doc.sentences.at(i);
    }
    return out;
}

}  // namespace xsum
