#include "xsum/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace xsum {

namespace {

double mean_loss(const Model& model, std::span<const LabeledSequence> batch, const ClassWeights& weights) {
    LossSum total;
    for (const auto& seq : batch) total += model.loss(seq.ref(), weights);
    return total.mean();
}

}  // namespace

GradCheckResult grad_check(const Model& model, std::span<const LabeledSequence> batch, const ClassWeights& weights,
                           double step) {
    std::vector<double> analytic(model.params().size(), 0.0);
    LossSum total;
    for (const auto& seq : batch) total += model.accumulate_gradient(seq.ref(), weights, analytic);
    if (total.weight > 0.0)
        for (double& g : analytic) g /= total.weight;

    GradCheckResult result;
    result.parameters = analytic.size();
    Model probe = model;
    auto params = probe.params();
    for (const auto& section : model.layout().sections()) {
        for (std::size_t k = 0; k < section.size(); ++k) {
            const std::size_t idx = section.offset + k;
            const double saved = params[idx];
            params[idx] = saved + step;
            const double up = mean_loss(probe, batch, weights);
            params[idx] = saved - step;
            const double down = mean_loss(probe, batch, weights);
            params[idx] = saved;

            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[idx];
            const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
            const double rel = std::abs(a - numeric) / denom;
            if (result.worst.empty() || rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst = section.name + "[" + std::to_string(k) + "]";
            }
        }
    }
    return result;
}

GradCheckProblem random_problem(const Architecture& arch, std::size_t sequences, std::size_t steps,
                                std::uint64_t seed) {
    Rng rng = Rng::derive(seed, "grad-check");
    GradCheckProblem p{Model(arch), {}};
    p.model.initialize(rng);
    for (const auto& s : p.model.layout().sections()) {
        const bool bias = s.name.ends_with(".b") || s.name == "b";
        if (!bias) continue;
        for (std::size_t k = 0; k < s.size(); ++k) p.model.params()[s.offset + k] += rng.uniform(-0.5, 0.5);
    }
    for (std::size_t n = 0; n < sequences; ++n) {
        LabeledSequence seq;
        seq.doc_id = "g" + std::to_string(n);
        seq.features = Matrix(steps, arch.input_dim);
        for (double& v : seq.features.values()) v = rng.normal();
        seq.labels.resize(steps);
        for (auto& y : seq.labels) y = static_cast<int>(rng.below(2));
        p.batch.push_back(std::move(seq));
    }
    // Both classes present, so balanced weights are defined.
    p.batch.front().labels.front() = 1;
    p.batch.back().labels.back() = 0;
    if (sequences == 1 && steps == 1) p.batch.front().labels.front() = 1;
    return p;
}

}  // namespace xsum
