#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xsum/model.hpp"

namespace xsum {

enum class Optimizer : std::uint8_t { sgd, adam };

struct TrainConfig {
    int epochs = 50;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool class_balance = false;
    std::size_t batch = 8;  // documents per optimizer step
    std::uint64_t seed = 1;

    // Throws ConfigError on out-of-range values.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// One document's training sequence.
struct LabeledSequence {
    std::string doc_id;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::uint8_t> mask;  // empty: all steps valid

    SequenceRef ref() const { return {features.view(), labels, mask}; }
};

struct TrainReport {
    std::vector<double> epoch_loss;  // weighted mean BCE per epoch
    std::uint64_t params_checksum = 0;
    double wall_seconds = 0.0;
};

void to_json(nlohmann::json& j, const TrainReport& r);

struct TrainResult {
    Model model;
    TrainReport report;
};

class AdamState {
public:
    AdamState(std::size_t n, double beta1, double beta2, double epsilon)
        : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

    void step(std::span<double> params, std::span<const double> grad, double lr);

private:
    std::vector<double> m_, v_;
    double beta1_, beta2_, epsilon_;
    std::uint64_t t_ = 0;
};

// Weights used for a dataset under `balance`: balanced from its label counts,
// otherwise unit weights.
ClassWeights class_weights(std::span<const LabeledSequence> data, bool balance);

// Weighted mean loss of `model` over `data`.
double dataset_loss(const Model& model, std::span<const LabeledSequence> data, const ClassWeights& weights);

// FNV-1a over the float32 little-endian image of the parameters, the same
// bytes a checkpoint stores.
std::uint64_t params_checksum(std::span<const double> params);

// Minimizes class-weighted BCE with analytic gradients. Deterministic for a
// given (architecture, data, config): initialization and per-epoch shuffling
// draw from streams derived from config.seed, and the loop is single threaded.
// Throws NumericError naming the epoch and batch if loss or gradient stops
// being finite.
TrainResult train(const Architecture& arch, std::span<const LabeledSequence> data, const TrainConfig& config);

}  // namespace xsum
