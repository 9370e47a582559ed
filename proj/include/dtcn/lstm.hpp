// Single LSTM cell on the autodiff tape.
#pragma once

#include "dtcn/autodiff.hpp"

namespace dtcn {

enum class GateActivation { Sigmoid, HardSigmoid };

struct LstmParams {
    // Combined gate weights for [x; h], gate order (i, f, o, g).
    Var weights;  // (input_size + hidden_size) x (4 * hidden_size)
    Var bias;     // 4 * hidden_size
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
};

// Forget-gate bias starts at 1, other biases at 0, weights Glorot-uniform.
LstmParams init_lstm(std::size_t input_size, std::size_t hidden_size,
                     std::mt19937_64& rng);

struct LstmStep {
    Var h;
    Var c;
};

// i,f,o = gate(W[x;h]+b); g = tanh(W_g[x;h]+b_g);
// c' = f*c + i*g; h' = o*tanh(c').
// candidate_hard_sigmoid additionally applies the hard sigmoid to the
// candidate activation instead of tanh.
LstmStep lstm_cell(Tape& tape, Var x, Var h, Var c, const LstmParams& params,
                   GateActivation gate_act = GateActivation::Sigmoid,
                   bool candidate_hard_sigmoid = false);

}  // namespace dtcn
