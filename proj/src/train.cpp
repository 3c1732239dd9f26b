#include "xsum/train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

namespace xsum {

using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (batch < 1) throw ConfigError("batch must be >= 1 document");
    if (optimizer == Optimizer::adam) {
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
            throw ConfigError("Adam betas must lie in [0, 1)");
        if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
    }
}

void to_json(json& j, const TrainConfig& c) {
    j = json{{"epochs", c.epochs},
             {"learning_rate", c.learning_rate},
             {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "sgd"},
             {"beta1", c.beta1},
             {"beta2", c.beta2},
             {"epsilon", c.epsilon},
             {"class_balance", c.class_balance},
             {"batch", c.batch},
             {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
    j.at("epochs").get_to(c.epochs);
    j.at("learning_rate").get_to(c.learning_rate);
    const auto opt = j.at("optimizer").get<std::string>();
    if (opt != "adam" && opt != "sgd") throw ConfigError("unknown optimizer '" + opt + "'");
    c.optimizer = opt == "adam" ? Optimizer::adam : Optimizer::sgd;
    j.at("beta1").get_to(c.beta1);
    j.at("beta2").get_to(c.beta2);
    j.at("epsilon").get_to(c.epsilon);
    j.at("class_balance").get_to(c.class_balance);
    j.at("batch").get_to(c.batch);
    j.at("seed").get_to(c.seed);
}

void to_json(json& j, const TrainReport& r) {
    // wall_seconds stays out so reruns produce identical bytes.
    j = json{{"epoch_loss", r.epoch_loss}, {"params_checksum", hex64(r.params_checksum)}};
}

void AdamState::step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
        params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + epsilon_);
    }
}

ClassWeights class_weights(std::span<const LabeledSequence> data, bool balance) {
    if (!balance) return {};
    std::size_t pos = 0, neg = 0;
    for (const auto& seq : data)
        for (std::size_t t = 0; t < seq.labels.size(); ++t) {
            if (!seq.mask.empty() && !seq.mask[t]) continue;
            (seq.labels[t] ? pos : neg) += 1;
        }
    return ClassWeights::balanced(pos, neg);
}

double dataset_loss(const Model& model, std::span<const LabeledSequence> data, const ClassWeights& weights) {
    LossSum total;
    for (const auto& seq : data) total += model.loss(seq.ref(), weights);
    return total.mean();
}

std::uint64_t params_checksum(std::span<const double> params) {
    std::vector<std::uint8_t> bytes(params.size() * sizeof(float));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const float f = static_cast<float>(params[k]);
        std::memcpy(bytes.data() + k * sizeof(float), &f, sizeof(float));
    }
    return fnv1a64(bytes);
}

TrainResult train(const Architecture& arch, std::span<const LabeledSequence> data, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw DataError("training set is empty");
    const auto started = std::chrono::steady_clock::now();

    Model model(arch);
    Rng init_rng = Rng::derive(config.seed, "init");
    Rng shuffle_rng = Rng::derive(config.seed, "shuffle");
    model.initialize(init_rng);

    const ClassWeights weights = class_weights(data, config.class_balance);
    std::vector<double> grad(model.params().size());
    AdamState adam(grad.size(), config.beta1, config.beta2, config.epsilon);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order.begin(), order.end());
        LossSum epoch_total;
        std::size_t batch_index = 0;
        for (std::size_t first = 0; first < order.size(); first += config.batch, ++batch_index) {
            const std::size_t last = std::min(order.size(), first + config.batch);
            std::fill(grad.begin(), grad.end(), 0.0);
            LossSum batch_total;
            for (std::size_t k = first; k < last; ++k)
                batch_total += model.accumulate_gradient(data[order[k]].ref(), weights, grad);
            if (batch_total.weight == 0.0) continue;

            const auto where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index);
            if (!std::isfinite(batch_total.weighted_loss)) throw NumericError("non-finite loss at " + where);
            const double scale = 1.0 / batch_total.weight;
            for (double& g : grad) {
                g *= scale;
                if (!std::isfinite(g)) throw NumericError("non-finite gradient at " + where);
            }
            if (config.optimizer == Optimizer::adam) {
                adam.step(model.params(), grad, config.learning_rate);
            } else {
                la::axpy(-config.learning_rate, grad, model.params());
            }
            epoch_total += batch_total;
        }
        report.epoch_loss.push_back(epoch_total.mean());
    }

    report.params_checksum = params_checksum(model.params());
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(model), std::move(report)};
}

}  // namespace xsum
