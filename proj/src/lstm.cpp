#include "dtcn/lstm.hpp"

#include <cmath>
#include <stdexcept>

namespace dtcn {

LstmParams init_lstm(std::size_t input_size, std::size_t hidden_size,
                     std::mt19937_64& rng) {
    const std::size_t rows = input_size + hidden_size;
    const std::size_t cols = 4 * hidden_size;
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Tensor w(rows, cols);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = uni(rng);
    Tensor b(cols);
    // forget gate occupies columns [hidden_size, 2*hidden_size)
    for (std::size_t j = hidden_size; j < 2 * hidden_size; ++j) b[j] = 1.0;
    LstmParams p;
    p.weights = make_param(std::move(w));
    p.bias = make_param(std::move(b));
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    return p;
}

LstmStep lstm_cell(Tape& tape, Var x, Var h, Var c, const LstmParams& params,
                   GateActivation gate_act, bool candidate_hard_sigmoid) {
    const std::size_t hs = params.hidden_size;
    if (x->value.size() != params.input_size || h->value.size() != hs ||
        c->value.size() != hs) {
        throw std::invalid_argument("lstm_cell: dimension mismatch");
    }
    Var z = tape.concat({x, h});
    Var gates = tape.add(tape.matmul(z, params.weights), params.bias);
    auto gate = [&](Var v) {
        return gate_act == GateActivation::HardSigmoid ? tape.hard_sigmoid_(v)
                                                       : tape.sigmoid_(v);
    };
    Var i = gate(tape.slice(gates, 0, hs));
    Var f = gate(tape.slice(gates, hs, hs));
    Var o = gate(tape.slice(gates, 2 * hs, hs));
    Var cand = tape.slice(gates, 3 * hs, hs);
    Var g = candidate_hard_sigmoid ? tape.hard_sigmoid_(cand) : tape.tanh_(cand);
    Var c_next = tape.add(tape.mul(f, c), tape.mul(i, g));
    Var h_next = tape.mul(o, tape.tanh_(c_next));
    return {h_next, c_next};
}

}  // namespace dtcn
