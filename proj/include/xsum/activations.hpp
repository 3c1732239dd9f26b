#pragma once

#include <cstddef>
#include <span>

namespace xsum {

// 1 / (1 + exp(-z)), evaluated on the branch that never overflows exp().
double sigmoid(double z);

// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kProbEpsilon = 1e-7;

// Per-class loss weights. Balanced weights are N / (2 N_pos) and N / (2 N_neg),
// so a weighted sum over the original data equals an unweighted sum over a
// dataset resampled to equal class counts.
struct ClassWeights {
    double negative = 1.0;
    double positive = 1.0;

    static ClassWeights balanced(std::size_t positives, std::size_t negatives);
    double operator()(int label) const { return label ? positive : negative; }
};

// -[y ln p + (1 - y) ln(1 - p)] with p clamped.
double bce_term(double prob, int label);

// sum_i w(y_i) bce_term(p_i, y_i) / sum_i w(y_i). Throws DataError on a
// length mismatch; an empty input has loss 0.
double bce_loss(std::span<const double> probs, std::span<const int> labels, const ClassWeights& weights = {});

}  // namespace xsum
