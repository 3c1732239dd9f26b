#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xsum/model.hpp"

namespace xsum {

// Gate activations and new state for one time step.
struct LstmStep {
    std::vector<double> forget;     // f_t
    std::vector<double> input;      // i_t
    std::vector<double> candidate;  // c~_t
    std::vector<double> output;     // o_t
    std::vector<double> cell;       // c_t
    std::vector<double> hidden;     // h_t
};

//   f = sigmoid(W_f x + U_f h_prev + b_f)
//   i = sigmoid(W_i x + U_i h_prev + b_i)
//   c~ = tanh(W_c x + U_c h_prev + b_c)
//   c = f * c_prev + i * c~
//   o = sigmoid(W_o x + U_o h_prev + b_o)
//   h = o * tanh(c)
LstmStep lstm_cell(const LstmDirectionParams& p, std::span<const double> x, std::span<const double> h_prev,
                   std::span<const double> c_prev);

// Per-step inclusion probabilities. The forward direction scans valid steps
// left to right, the backward direction right to left; masked steps are
// skipped by both scans (state passes through) and report NaN. Throws
// DataError when the mask length differs from the sequence length.
std::vector<double> lstm_forward(const LstmParams& p, ConstMatView seq, std::span<const std::uint8_t> mask = {});

}  // namespace xsum
