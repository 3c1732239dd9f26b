#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xsum {

inline constexpr double kDefaultLabelThreshold = 0.7;

// dot(u, v) / (|u| |v|); 0 when either vector is zero. Throws DataError on a
// dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct LabeledSentence {
    std::size_t index = 0;
    int label = 0;
    double max_similarity = 0.0;

    bool operator==(const LabeledSentence&) const = default;
};

// Labels article sentence i positive iff max_j cosine(e_i, s_j) >= threshold.
// Throws DataError when either side is empty and ConfigError when the
// threshold lies outside [-1, 1].
std::vector<LabeledSentence> label_document(const std::vector<std::vector<double>>& article,
                                            const std::vector<std::vector<double>>& summary, double threshold);

}  // namespace xsum
