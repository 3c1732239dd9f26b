#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xsum/train.hpp"

namespace xsum {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t parameters = 0;
    std::string worst;  // "section[index]" of the largest error
};

// Relative error |a - n| / max(|a|, |n|, kGradCheckFloor). At step 1e-5 the
// central difference carries roundoff near 1e-11 for O(1) losses, so partials
// below the floor are compared on an absolute scale.
inline constexpr double kGradCheckFloor = 1e-6;

// Compares every analytic partial of the weighted mean BCE over `batch`
// against central differences (L(p + h) - L(p - h)) / 2h.
GradCheckResult grad_check(const Model& model, std::span<const LabeledSequence> batch,
                           const ClassWeights& weights = {}, double step = 1e-5);

struct GradCheckProblem {
    Model model;
    std::vector<LabeledSequence> batch;
};

// Random model and batch for checking: initialized weights plus small random
// biases, standard-normal features, random labels with both classes present.
GradCheckProblem random_problem(const Architecture& arch, std::size_t sequences, std::size_t steps,
                                std::uint64_t seed);

}  // namespace xsum
