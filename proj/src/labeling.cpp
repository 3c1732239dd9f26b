#include "xsum/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xsum/common.hpp"
#include "xsum/linalg.hpp"

namespace xsum {

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw DataError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + ")");
    const double uu = la::dot(u, u);
    const double vv = la::dot(v, v);
    if (uu == 0.0 || vv == 0.0) return 0.0;
    // sqrt(fl(x*x)) == x in binary floating point, so cosine(v, v) is exactly 1.
    const double c = la::dot(u, v) / std::sqrt(uu * vv);
    return std::clamp(c, -1.0, 1.0);
}

std::vector<LabeledSentence> label_document(const std::vector<std::vector<double>>& article,
                                            const std::vector<std::vector<double>>& summary, double threshold) {
    if (!(threshold >= -1.0 && threshold <= 1.0)) throw ConfigError("label threshold must lie in [-1, 1]");
    if (article.empty()) throw DataError("label_document: article has no sentences");
    if (summary.empty()) throw DataError("label_document: summary has no sentences");

    std::vector<LabeledSentence> out(article.size());
    for (std::size_t i = 0; i < article.size(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& s : summary) best = std::max(best, cosine(article[i], s));
        out[i] = {i, best >= threshold ? 1 : 0, best};
    }
    return out;
}

}  // namespace xsum
