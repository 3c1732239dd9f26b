#include "xsum/model.hpp"

#include <cmath>
#include <limits>

#include "xsum/lstm.hpp"

namespace xsum {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::logistic: return "logistic";
        case ModelKind::feed_forward: return "ffnn";
        case ModelKind::lstm_uni: return "lstm-uni";
        case ModelKind::lstm_bi: return "lstm-bi";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "logistic") return ModelKind::logistic;
    if (s == "ffnn") return ModelKind::feed_forward;
    if (s == "lstm-uni") return ModelKind::lstm_uni;
    if (s == "lstm-bi") return ModelKind::lstm_bi;
    throw ConfigError("unknown model kind '" + std::string(s) + "' (expected logistic, ffnn, lstm-uni, lstm-bi)");
}

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation '" + std::string(s) + "' (expected relu or tanh)");
}

void Architecture::validate() const {
    if (input_dim == 0) throw ConfigError("model input dimension must be positive");
    switch (kind) {
        case ModelKind::logistic: break;
        case ModelKind::feed_forward:
            if (hidden.empty()) throw ConfigError("feed-forward network needs at least one hidden layer");
            for (auto w : hidden)
                if (w == 0) throw ConfigError("feed-forward hidden widths must be positive");
            break;
        case ModelKind::lstm_uni:
        case ModelKind::lstm_bi:
            if (lstm_hidden == 0) throw ConfigError("LSTM hidden size must be positive");
            break;
    }
}

std::string Architecture::label() const {
    switch (kind) {
        case ModelKind::logistic: return "Logistic Reg";
        case ModelKind::feed_forward: {
            std::string s = "NN";
            for (auto w : hidden) s += " " + std::to_string(w);
            return s;
        }
        case ModelKind::lstm_uni: return "LSTM Uni " + std::to_string(lstm_hidden);
        case ModelKind::lstm_bi: return "LSTM Bi " + std::to_string(lstm_hidden);
    }
    return "?";
}

void to_json(json& j, const Architecture& a) {
    j = json{{"kind", to_string(a.kind)},
             {"input_dim", a.input_dim},
             {"hidden", a.hidden},
             {"activation", to_string(a.activation)},
             {"lstm_hidden", a.lstm_hidden}};
}

void from_json(const json& j, Architecture& a) {
    a.kind = parse_model_kind(j.at("kind").get<std::string>());
    j.at("input_dim").get_to(a.input_dim);
    j.at("hidden").get_to(a.hidden);
    a.activation = parse_activation(j.at("activation").get<std::string>());
    j.at("lstm_hidden").get_to(a.lstm_hidden);
}

// ---------------------------------------------------------------------------
// Layout

const ParamSection& ParamLayout::add(std::string name, std::size_t rows, std::size_t cols) {
    sections_.push_back({std::move(name), total_, rows, cols});
    total_ += rows * cols;
    return sections_.back();
}

const ParamSection& ParamLayout::at(std::string_view name) const {
    for (const auto& s : sections_)
        if (s.name == name) return s;
    throw ConfigError("no parameter section named '" + std::string(name) + "'");
}

ParamLayout make_layout(const Architecture& arch) {
    arch.validate();
    ParamLayout l;
    const std::size_t n = arch.input_dim;
    switch (arch.kind) {
        case ModelKind::logistic:
            l.add("w", 1, n);
            l.add("b", 1, 1);
            break;
        case ModelKind::feed_forward: {
            std::size_t prev = n;
            for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
                l.add("layer" + std::to_string(i) + ".W", arch.hidden[i], prev);
                l.add("layer" + std::to_string(i) + ".b", 1, arch.hidden[i]);
                prev = arch.hidden[i];
            }
            l.add("head.w", 1, prev);
            l.add("head.b", 1, 1);
            break;
        }
        case ModelKind::lstm_uni:
        case ModelKind::lstm_bi: {
            const std::size_t d = arch.lstm_hidden;
            const bool bi = arch.kind == ModelKind::lstm_bi;
            const char* dirs[] = {"fwd", "bwd"};
            for (const char* dir : std::span(dirs, bi ? 2 : 1)) {
                l.add(std::string(dir) + ".W", 4 * d, n);
                l.add(std::string(dir) + ".U", 4 * d, d);
                l.add(std::string(dir) + ".b", 1, 4 * d);
            }
            l.add("head.w", 1, bi ? 2 * d : d);
            l.add("head.b", 1, 1);
            break;
        }
    }
    return l;
}

namespace detail {

MatView mat(std::span<double> buffer, const ParamSection& s) {
    return {buffer.data() + s.offset, s.rows, s.cols};
}

ConstMatView mat(std::span<const double> buffer, const ParamSection& s) {
    return {buffer.data() + s.offset, s.rows, s.cols};
}

void check_sequence(const Architecture& arch, ConstMatView features, std::span<const std::uint8_t> mask,
                    std::size_t labels) {
    if (features.cols != arch.input_dim)
        throw DataError("feature width " + std::to_string(features.cols) + " does not match model input " +
                        std::to_string(arch.input_dim));
    if (!mask.empty() && mask.size() != features.rows)
        throw DataError("mask length " + std::to_string(mask.size()) + " does not match sequence length " +
                        std::to_string(features.rows));
    if (labels != features.rows)
        throw DataError("label count " + std::to_string(labels) + " does not match sequence length " +
                        std::to_string(features.rows));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model

Model::Model(Architecture arch) : arch_(std::move(arch)), layout_(make_layout(arch_)), params_(layout_.total(), 0.0) {}

std::span<double> Model::section(std::string_view name) {
    const auto& s = layout_.at(name);
    return std::span<double>(params_).subspan(s.offset, s.size());
}

std::span<const double> Model::section(std::string_view name) const {
    const auto& s = layout_.at(name);
    return std::span<const double>(params_).subspan(s.offset, s.size());
}

void Model::initialize(Rng& rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill_uniform = [&](std::span<double> out, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : out) v = rng.uniform(-limit, limit);
    };
    const std::size_t n = arch_.input_dim;
    switch (arch_.kind) {
        case ModelKind::logistic: fill_uniform(section("w"), n, 1); break;
        case ModelKind::feed_forward: {
            std::size_t prev = n;
            for (std::size_t i = 0; i < arch_.hidden.size(); ++i) {
                fill_uniform(section("layer" + std::to_string(i) + ".W"), prev, arch_.hidden[i]);
                prev = arch_.hidden[i];
            }
            fill_uniform(section("head.w"), prev, 1);
            break;
        }
        case ModelKind::lstm_uni:
        case ModelKind::lstm_bi: {
            const std::size_t d = arch_.lstm_hidden;
            for (const char* dir : {"fwd", "bwd"}) {
                if (arch_.kind == ModelKind::lstm_uni && std::string_view(dir) == "bwd") break;
                auto w = section(std::string(dir) + ".W");
                auto u = section(std::string(dir) + ".U");
                // Each gate block is its own d x n (resp. d x d) matrix.
                for (std::size_t g = 0; g < 4; ++g) {
                    fill_uniform(w.subspan(g * d * n, d * n), n, d);
                    fill_uniform(u.subspan(g * d * d, d * d), d, d);
                }
                auto b = section(std::string(dir) + ".b");
                std::fill_n(b.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(Gate::forget) * d), d,
                            1.0);
            }
            fill_uniform(section("head.w"), section("head.w").size(), 1);
            break;
        }
    }
}

LogisticParams Model::logistic() const {
    if (arch_.kind != ModelKind::logistic) throw ConfigError("model is not logistic regression");
    return {section("w"), section("b")[0]};
}

FeedForwardParams Model::feed_forward() const {
    if (arch_.kind != ModelKind::feed_forward) throw ConfigError("model is not a feed-forward network");
    FeedForwardParams p;
    for (std::size_t i = 0; i < arch_.hidden.size(); ++i) {
        const auto tag = "layer" + std::to_string(i);
        p.layers.push_back(
            {detail::mat(params(), layout_.at(tag + ".W")), section(tag + ".b"), arch_.activation});
    }
    p.head_w = section("head.w");
    p.head_b = section("head.b")[0];
    return p;
}

LstmParams Model::lstm() const {
    if (arch_.kind != ModelKind::lstm_uni && arch_.kind != ModelKind::lstm_bi)
        throw ConfigError("model is not an LSTM");
    auto direction = [&](const std::string& dir) {
        return LstmDirectionParams{detail::mat(params(), layout_.at(dir + ".W")),
                                   detail::mat(params(), layout_.at(dir + ".U")), section(dir + ".b")};
    };
    LstmParams p{direction("fwd"), std::nullopt, section("head.w"), section("head.b")[0]};
    if (arch_.kind == ModelKind::lstm_bi) p.backward = direction("bwd");
    return p;
}

// ---------------------------------------------------------------------------
// Logistic regression and feed-forward network

double lr_forward(const LogisticParams& p, std::span<const double> x) {
    if (x.size() != p.w.size())
        throw DataError("lr_forward: input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(p.w.size()));
    return sigmoid(la::dot(p.w, x) + p.b);
}

namespace {

double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// f'(z) expressed through the activation value.
double activate_grad(Activation a, double z, double out) {
    return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

struct FfnnTrace {
    std::vector<std::vector<double>> pre;   // z_l
    std::vector<std::vector<double>> post;  // h_l
};

double ffnn_trace(const FeedForwardParams& p, std::span<const double> x, FfnnTrace& trace) {
    trace.pre.resize(p.layers.size());
    trace.post.resize(p.layers.size());
    std::span<const double> h = x;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        auto& z = trace.pre[l];
        z.assign(layer.bias.begin(), layer.bias.end());
        la::gemv(layer.weight, h, z);
        auto& a = trace.post[l];
        a.resize(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) a[k] = activate(layer.activation, z[k]);
        h = a;
    }
    return la::dot(p.head_w, h) + p.head_b;
}

}  // namespace

double ffnn_forward(const FeedForwardParams& p, std::span<const double> x) {
    if (p.layers.empty() || x.size() != p.layers.front().weight.cols)
        throw DataError("ffnn_forward: input width does not match the first layer");
    FfnnTrace trace;
    return sigmoid(ffnn_trace(p, x, trace));
}

std::vector<double> Model::predict(ConstMatView features, std::span<const std::uint8_t> mask) const {
    detail::check_sequence(arch_, features, mask, features.rows);
    if (arch_.kind == ModelKind::lstm_uni || arch_.kind == ModelKind::lstm_bi)
        return lstm_forward(lstm(), features, mask);

    std::vector<double> out(features.rows, std::numeric_limits<double>::quiet_NaN());
    if (arch_.kind == ModelKind::logistic) {
        const auto p = logistic();
        for (std::size_t t = 0; t < features.rows; ++t)
            if (mask.empty() || mask[t]) out[t] = lr_forward(p, features.row(t));
    } else {
        const auto p = feed_forward();
        for (std::size_t t = 0; t < features.rows; ++t)
            if (mask.empty() || mask[t]) out[t] = ffnn_forward(p, features.row(t));
    }
    return out;
}

LossSum Model::loss(const SequenceRef& seq, const ClassWeights& weights) const {
    const auto probs = predict(seq.features, seq.mask);
    LossSum s;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        if (!seq.valid(t)) continue;
        const double w = weights(seq.labels[t]);
        s.weighted_loss += w * bce_term(probs[t], seq.labels[t]);
        s.weight += w;
    }
    return s;
}

LossSum Model::accumulate_gradient(const SequenceRef& seq, const ClassWeights& weights,
                                   std::span<double> grad) const {
    detail::check_sequence(arch_, seq.features, seq.mask, seq.labels.size());
    if (grad.size() != params_.size()) throw ConfigError("gradient buffer does not match parameter count");

    if (arch_.kind == ModelKind::lstm_uni || arch_.kind == ModelKind::lstm_bi)
        return detail::lstm_accumulate(*this, seq, weights, grad);

    LossSum s;
    if (arch_.kind == ModelKind::logistic) {
        const auto p = logistic();
        auto gw = detail::slice(grad, layout_.at("w"));
        double& gb = grad[layout_.at("b").offset];
        for (std::size_t t = 0; t < seq.features.rows; ++t) {
            if (!seq.valid(t)) continue;
            const auto x = seq.features.row(t);
            const int y = seq.labels[t];
            const double w = weights(y);
            const double prob = lr_forward(p, x);
            s.weighted_loss += w * bce_term(prob, y);
            s.weight += w;
            // d/dz of -[y ln s(z) + (1-y) ln(1-s(z))] = s(z) - y
            const double dz = w * (prob - y);
            la::axpy(dz, x, gw);
            gb += dz;
        }
        return s;
    }

    const auto p = feed_forward();
    const std::size_t layers = p.layers.size();
    FfnnTrace trace;
    std::vector<double> delta, prev_delta;
    for (std::size_t t = 0; t < seq.features.rows; ++t) {
        if (!seq.valid(t)) continue;
        const auto x = seq.features.row(t);
        const int y = seq.labels[t];
        const double w = weights(y);
        const double prob = sigmoid(ffnn_trace(p, x, trace));
        s.weighted_loss += w * bce_term(prob, y);
        s.weight += w;

        const double dz = w * (prob - y);
        la::axpy(dz, trace.post.back(), detail::slice(grad, layout_.at("head.w")));
        grad[layout_.at("head.b").offset] += dz;

        // delta_L = dz * w_head (.) f'(z_L)
        const auto& z_last = trace.pre.back();
        delta.resize(z_last.size());
        for (std::size_t k = 0; k < delta.size(); ++k)
            delta[k] = dz * p.head_w[k] * activate_grad(p.layers.back().activation, z_last[k], trace.post.back()[k]);

        for (std::size_t l = layers; l-- > 0;) {
            const auto tag = "layer" + std::to_string(l);
            const std::span<const double> below = l == 0 ? x : std::span<const double>(trace.post[l - 1]);
            la::ger(detail::mat(grad, layout_.at(tag + ".W")), 1.0, delta, below);
            la::axpy(1.0, delta, detail::slice(grad, layout_.at(tag + ".b")));
            if (l == 0) break;
            prev_delta.assign(trace.pre[l - 1].size(), 0.0);
            la::gemv_t(p.layers[l].weight, delta, prev_delta);
            for (std::size_t k = 0; k < prev_delta.size(); ++k)
                prev_delta[k] *= activate_grad(p.layers[l - 1].activation, trace.pre[l - 1][k], trace.post[l - 1][k]);
            std::swap(delta, prev_delta);
        }
    }
    return s;
}

}  // namespace xsum
