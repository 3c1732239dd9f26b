#include "xsum/lstm.hpp"

#include <cmath>
#include <limits>

namespace xsum {

namespace {

// Everything the backward pass needs from one forward step.
struct StepCache {
    std::vector<double> gates;  // [f | i | c~ | o], post-activation
    std::vector<double> cell;
    std::vector<double> tanh_cell;
    std::vector<double> hidden;
};

// z = W x + U h_prev + b, then the gate nonlinearities and state update.
void cell_forward(const LstmDirectionParams& p, std::span<const double> x, std::span<const double> h_prev,
                  std::span<const double> c_prev, StepCache& out) {
    const std::size_t d = p.hidden();
    out.gates.assign(p.b.begin(), p.b.end());
    la::gemv(p.w, x, out.gates);
    la::gemv(p.u, h_prev, out.gates);

    double* f = out.gates.data();
    double* i = f + d;
    double* g = i + d;
    double* o = g + d;
    out.cell.resize(d);
    out.tanh_cell.resize(d);
    out.hidden.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        f[k] = sigmoid(f[k]);
        i[k] = sigmoid(i[k]);
        g[k] = std::tanh(g[k]);
        o[k] = sigmoid(o[k]);
        out.cell[k] = f[k] * c_prev[k] + i[k] * g[k];
        out.tanh_cell[k] = std::tanh(out.cell[k]);
        out.hidden[k] = o[k] * out.tanh_cell[k];
    }
}

// Runs one direction over `order` (indices of valid steps in scan order).
void scan(const LstmDirectionParams& p, ConstMatView seq, const std::vector<std::size_t>& order,
          std::vector<StepCache>& cache) {
    const std::size_t d = p.hidden();
    const std::vector<double> zeros(d, 0.0);
    cache.resize(order.size());
    for (std::size_t s = 0; s < order.size(); ++s) {
        const std::span<const double> h_prev = s == 0 ? std::span<const double>(zeros) : cache[s - 1].hidden;
        const std::span<const double> c_prev = s == 0 ? std::span<const double>(zeros) : cache[s - 1].cell;
        cell_forward(p, seq.row(order[s]), h_prev, c_prev, cache[s]);
    }
}

std::vector<std::size_t> valid_steps(std::size_t n, std::span<const std::uint8_t> mask) {
    std::vector<std::size_t> v;
    v.reserve(n);
    for (std::size_t t = 0; t < n; ++t)
        if (mask.empty() || mask[t]) v.push_back(t);
    return v;
}

}  // namespace

LstmStep lstm_cell(const LstmDirectionParams& p, std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev) {
    const std::size_t d = p.hidden();
    if (x.size() != p.input() || h_prev.size() != d || c_prev.size() != d)
        throw DataError("lstm_cell: dimension mismatch");
    StepCache c;
    cell_forward(p, x, h_prev, c_prev, c);
    auto gate = [&](std::size_t g) {
        return std::vector<double>(c.gates.begin() + static_cast<std::ptrdiff_t>(g * d),
                                   c.gates.begin() + static_cast<std::ptrdiff_t>((g + 1) * d));
    };
    return {gate(0), gate(1), gate(2), gate(3), c.cell, c.hidden};
}

std::vector<double> lstm_forward(const LstmParams& p, ConstMatView seq, std::span<const std::uint8_t> mask) {
    if (!mask.empty() && mask.size() != seq.rows)
        throw DataError("lstm_forward: mask length " + std::to_string(mask.size()) + " vs sequence length " +
                        std::to_string(seq.rows));
    if (seq.cols != p.forward.input()) throw DataError("lstm_forward: feature width does not match the model");
    const std::size_t d = p.forward.hidden();
    const auto order = valid_steps(seq.rows, mask);
    const std::vector<std::size_t> reverse(order.rbegin(), order.rend());

    std::vector<StepCache> fwd, bwd;
    scan(p.forward, seq, order, fwd);
    if (p.backward) scan(*p.backward, seq, reverse, bwd);

    std::vector<double> out(seq.rows, std::numeric_limits<double>::quiet_NaN());
    const auto head_f = p.head_w.subspan(0, d);
    for (std::size_t s = 0; s < order.size(); ++s) {
        double z = p.head_b + la::dot(head_f, fwd[s].hidden);
        // The backward scan reached step order[s] at its (n - 1 - s)-th position.
        if (p.backward) z += la::dot(p.head_w.subspan(d, d), bwd[order.size() - 1 - s].hidden);
        out[order[s]] = sigmoid(z);
    }
    return out;
}

namespace detail {

namespace {

struct DirectionGrad {
    MatView w;
    MatView u;
    std::span<double> b;
};

// Backpropagation through time for one direction. `dh_head[s]` is the loss
// gradient flowing into h at scan position s from the output head.
void bptt(const LstmDirectionParams& p, ConstMatView seq, const std::vector<std::size_t>& order,
          const std::vector<StepCache>& cache, const std::vector<std::vector<double>>& dh_head, DirectionGrad g) {
    const std::size_t d = p.hidden();
    const std::vector<double> zeros(d, 0.0);
    std::vector<double> dh_next(d, 0.0), dc_next(d, 0.0), dz(4 * d), dh(d);
    for (std::size_t s = order.size(); s-- > 0;) {
        const auto& st = cache[s];
        const std::span<const double> c_prev = s == 0 ? std::span<const double>(zeros) : cache[s - 1].cell;
        const std::span<const double> h_prev = s == 0 ? std::span<const double>(zeros) : cache[s - 1].hidden;
        const double* f = st.gates.data();
        const double* i = f + d;
        const double* gc = i + d;
        const double* o = gc + d;
        for (std::size_t k = 0; k < d; ++k) {
            dh[k] = dh_head[s][k] + dh_next[k];
            const double d_o = dh[k] * st.tanh_cell[k];
            const double dc = dh[k] * o[k] * (1.0 - st.tanh_cell[k] * st.tanh_cell[k]) + dc_next[k];
            const double d_f = dc * c_prev[k];
            const double d_i = dc * gc[k];
            const double d_g = dc * i[k];
            dc_next[k] = dc * f[k];
            dz[k] = d_f * f[k] * (1.0 - f[k]);
            dz[d + k] = d_i * i[k] * (1.0 - i[k]);
            dz[2 * d + k] = d_g * (1.0 - gc[k] * gc[k]);
            dz[3 * d + k] = d_o * o[k] * (1.0 - o[k]);
        }
        la::ger(g.w, 1.0, dz, seq.row(order[s]));
        la::ger(g.u, 1.0, dz, h_prev);
        la::axpy(1.0, dz, g.b);
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        la::gemv_t(p.u, dz, dh_next);
    }
}

}  // namespace

LossSum lstm_accumulate(const Model& model, const SequenceRef& seq, const ClassWeights& weights,
                        std::span<double> grad) {
    const auto p = model.lstm();
    const auto& layout = model.layout();
    const std::size_t d = p.forward.hidden();
    const auto order = valid_steps(seq.features.rows, seq.mask);
    const std::size_t n = order.size();
    const std::vector<std::size_t> reverse(order.rbegin(), order.rend());

    std::vector<StepCache> fwd, bwd;
    scan(p.forward, seq.features, order, fwd);
    if (p.backward) scan(*p.backward, seq.features, reverse, bwd);

    LossSum s;
    auto head_w_grad = slice(grad, layout.at("head.w"));
    double& head_b_grad = grad[layout.at("head.b").offset];
    std::vector<std::vector<double>> dh_fwd(n, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> dh_bwd(p.backward ? n : 0, std::vector<double>(d, 0.0));

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t t = order[k];
        const auto& hf = fwd[k].hidden;
        double z = p.head_b + la::dot(p.head_w.subspan(0, d), hf);
        if (p.backward) z += la::dot(p.head_w.subspan(d, d), bwd[n - 1 - k].hidden);
        const double prob = sigmoid(z);
        const int y = seq.labels[t];
        const double w = weights(y);
        s.weighted_loss += w * bce_term(prob, y);
        s.weight += w;

        const double dz = w * (prob - y);
        la::axpy(dz, hf, head_w_grad.subspan(0, d));
        la::axpy(dz, p.head_w.subspan(0, d), dh_fwd[k]);
        if (p.backward) {
            la::axpy(dz, bwd[n - 1 - k].hidden, head_w_grad.subspan(d, d));
            la::axpy(dz, p.head_w.subspan(d, d), dh_bwd[n - 1 - k]);
        }
        head_b_grad += dz;
    }

    auto dir_grad = [&](const std::string& dir) {
        return DirectionGrad{mat(grad, layout.at(dir + ".W")), mat(grad, layout.at(dir + ".U")),
                             slice(grad, layout.at(dir + ".b"))};
    };
    bptt(p.forward, seq.features, order, fwd, dh_fwd, dir_grad("fwd"));
    if (p.backward) bptt(*p.backward, seq.features, reverse, bwd, dh_bwd, dir_grad("bwd"));
    return s;
}

}  // namespace detail

}  // namespace xsum
