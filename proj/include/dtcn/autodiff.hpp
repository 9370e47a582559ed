// Reverse-mode automatic differentiation over a recording tape.
//
// A Tape records primitive operations in creation order (already a
// topological order); backward() replays it in reverse. Parameters are
// long-lived leaf nodes created with make_param and shared across tapes;
// their gradients accumulate until zeroed by the owner.
#pragma once

#include "dtcn/tensor.hpp"

#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace dtcn {

struct TapeNode {
    Tensor value;
    Tensor grad;  // allocated only when requires_grad
    bool requires_grad = false;
    std::vector<std::shared_ptr<TapeNode>> parents;
    std::function<void(TapeNode&)> backprop;  // empty for leaves
};

using Var = std::shared_ptr<TapeNode>;

// Trainable leaf. Gradient storage persists with the parameter.
Var make_param(Tensor value);
// Non-trainable leaf.
Var make_const(Tensor value);

// hard_sigmoid(x) = clamp(0.2 x + 0.5, 0, 1)
double hard_sigmoid_scalar(double x);

class Tape {
public:
    // recording=false skips gradient bookkeeping (inference mode).
    explicit Tape(bool recording = true) : recording_(recording) {}

    Var constant(Tensor v) { return make_const(std::move(v)); }

    // a: (m x k) or (k); b: (k x n). Result (m x n) or (n).
    Var matmul(Var a, Var b);
    // Same shape, or a 2-D with b a 1-D per-row bias.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    // Elementwise product.
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var tanh_(Var a);
    Var sigmoid_(Var a);
    Var hard_sigmoid_(Var a);
    // Softmax along the last axis with max-subtraction.
    Var softmax(Var a);
    // 1-D concatenation.
    Var concat(const std::vector<Var>& parts);
    // Row i of a 2-D tensor as a 1-D tensor.
    Var row(Var a, std::size_t i);
    // 1-D slice [start, start+len).
    Var slice(Var a, std::size_t start, std::size_t len);
    // Scalar sum of all elements.
    Var sum(Var a);
    // Mean over all elements of (a - b)^2.
    Var mean_squared_error(Var a, Var b);
    // sum_j w_j * items_j over same-shaped 1-D tensors.
    Var weighted_sum(const std::vector<Var>& items, const std::vector<double>& w);
    // Inverted dropout: zero with probability rate, survivors scaled by
    // 1/(1-rate). Identity when !training or rate == 0. rate must be < 1.
    Var dropout(Var a, double rate, bool training, std::mt19937_64& rng);

    // Reverse accumulation from a scalar loss. One backward per tape.
    void backward(const Var& loss);

    bool recording() const { return recording_; }
    std::size_t num_recorded() const { return order_.size(); }

private:
    Var emit(Tensor value, std::vector<Var> parents,
             std::function<void(TapeNode&)> bp, const char* op_name);

    std::vector<Var> order_;
    bool recording_;
    bool backward_done_ = false;
};

}  // namespace dtcn
