#include "xsum/activations.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsum/common.hpp"

namespace xsum {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

ClassWeights ClassWeights::balanced(std::size_t positives, std::size_t negatives) {
    if (positives == 0 || negatives == 0)
        throw DataError("class balancing needs at least one positive and one negative label");
    const double n = static_cast<double>(positives + negatives);
    return {n / (2.0 * static_cast<double>(negatives)), n / (2.0 * static_cast<double>(positives))};
}

double bce_term(double prob, int label) {
    const double p = std::clamp(prob, kProbEpsilon, 1.0 - kProbEpsilon);
    return label ? -std::log(p) : -std::log1p(-p);
}

double bce_loss(std::span<const double> probs, std::span<const int> labels, const ClassWeights& weights) {
    if (probs.size() != labels.size())
        throw DataError("bce_loss: " + std::to_string(probs.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    double total = 0.0;
    double weight = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double w = weights(labels[i]);
        total += w * bce_term(probs[i], labels[i]);
        weight += w;
    }
    return weight > 0.0 ? total / weight : 0.0;
}

}  // namespace xsum
