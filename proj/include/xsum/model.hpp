#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xsum/activations.hpp"
#include "xsum/common.hpp"
#include "xsum/linalg.hpp"

namespace xsum {

enum class ModelKind : std::uint8_t { logistic, feed_forward, lstm_uni, lstm_bi };

std::string_view to_string(ModelKind kind);
// Accepts "logistic", "ffnn", "lstm-uni", "lstm-bi".
ModelKind parse_model_kind(std::string_view s);

enum class Activation : std::uint8_t { relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct Architecture {
    ModelKind kind = ModelKind::logistic;
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;  // feed-forward hidden widths, input side first
    Activation activation = Activation::relu;
    std::size_t lstm_hidden = 0;  // per direction

    // Throws ConfigError when dimensions do not chain.
    void validate() const;
    // Report label in the style "Logistic Reg", "NN 50 50", "LSTM Bi 50".
    std::string label() const;

    bool operator==(const Architecture&) const = default;
};

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);

// Named slice of the flat parameter vector.
struct ParamSection {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t size() const { return rows * cols; }
    bool operator==(const ParamSection&) const = default;
};

class ParamLayout {
public:
    const ParamSection& add(std::string name, std::size_t rows, std::size_t cols);
    const ParamSection& at(std::string_view name) const;
    const std::vector<ParamSection>& sections() const { return sections_; }
    std::size_t total() const { return total_; }

private:
    std::vector<ParamSection> sections_;
    std::size_t total_ = 0;
};

ParamLayout make_layout(const Architecture& arch);

// Read-only parameter views over a flat buffer.

struct LogisticParams {
    std::span<const double> w;
    double b = 0.0;
};

struct DenseLayer {
    ConstMatView weight;  // out x in
    std::span<const double> bias;
    Activation activation = Activation::relu;
};

struct FeedForwardParams {
    std::vector<DenseLayer> layers;
    std::span<const double> head_w;
    double head_b = 0.0;
};

enum class Gate : std::size_t { forget = 0, input = 1, candidate = 2, output = 3 };

// Gate blocks are stacked [forget; input; candidate; output] along rows.
struct LstmDirectionParams {
    ConstMatView w;  // 4d x n
    ConstMatView u;  // 4d x d
    std::span<const double> b;  // 4d

    std::size_t hidden() const { return u.cols; }
    std::size_t input() const { return w.cols; }
    ConstMatView w_gate(Gate g) const { return w.block_rows(static_cast<std::size_t>(g) * hidden(), hidden()); }
    ConstMatView u_gate(Gate g) const { return u.block_rows(static_cast<std::size_t>(g) * hidden(), hidden()); }
    std::span<const double> b_gate(Gate g) const {
        return b.subspan(static_cast<std::size_t>(g) * hidden(), hidden());
    }
};

struct LstmParams {
    LstmDirectionParams forward;
    std::optional<LstmDirectionParams> backward;
    std::span<const double> head_w;  // d (uni) or 2d (bi): [forward | backward]
    double head_b = 0.0;

    bool bidirectional() const { return backward.has_value(); }
};

// sigmoid(w . x + b)
double lr_forward(const LogisticParams& p, std::span<const double> x);

// h_l = f_l(W_l h_{l-1} + b_l);  y = sigmoid(w . h_L + b)
double ffnn_forward(const FeedForwardParams& p, std::span<const double> x);

// Weighted loss total and the weight it was normalized by.
struct LossSum {
    double weighted_loss = 0.0;
    double weight = 0.0;

    LossSum& operator+=(const LossSum& o) {
        weighted_loss += o.weighted_loss;
        weight += o.weight;
        return *this;
    }
    double mean() const { return weight > 0.0 ? weighted_loss / weight : 0.0; }
};

// One document: T steps of features, per-step labels, optional validity mask
// (empty means every step is valid).
struct SequenceRef {
    ConstMatView features;
    std::span<const int> labels;
    std::span<const std::uint8_t> mask;

    bool valid(std::size_t t) const { return mask.empty() || mask[t] != 0; }
};

class Model {
public:
    Model() = default;
    // Zero-initialized parameters. Throws ConfigError on a bad architecture.
    explicit Model(Architecture arch);

    const Architecture& architecture() const { return arch_; }
    const ParamLayout& layout() const { return layout_; }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    std::span<double> section(std::string_view name);
    std::span<const double> section(std::string_view name) const;

    // Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases, LSTM forget
    // bias 1.
    void initialize(Rng& rng);

    LogisticParams logistic() const;
    FeedForwardParams feed_forward() const;
    LstmParams lstm() const;

    // Per-step probabilities; masked steps report NaN.
    std::vector<double> predict(ConstMatView features, std::span<const std::uint8_t> mask = {}) const;

    // Loss of one sequence under `weights`, ignoring masked steps.
    LossSum loss(const SequenceRef& seq, const ClassWeights& weights) const;

    // Adds the gradient of sum_t w(y_t) bce_t to `grad` (same layout as
    // params) and returns that weighted sum. The caller normalizes.
    LossSum accumulate_gradient(const SequenceRef& seq, const ClassWeights& weights, std::span<double> grad) const;

private:
    Architecture arch_;
    ParamLayout layout_;
    std::vector<double> params_;
};

// Flat-buffer helpers shared by the model implementations.
namespace detail {
inline std::span<double> slice(std::span<double> buffer, const ParamSection& s) {
    return buffer.subspan(s.offset, s.size());
}
MatView mat(std::span<double> buffer, const ParamSection& s);
ConstMatView mat(std::span<const double> buffer, const ParamSection& s);
void check_sequence(const Architecture& arch, ConstMatView features, std::span<const std::uint8_t> mask,
                    std::size_t labels);
LossSum lstm_accumulate(const Model& model, const SequenceRef& seq, const ClassWeights& weights,
                        std::span<double> grad);
}  // namespace detail

}  // namespace xsum
