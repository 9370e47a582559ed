// RMSprop with optional global-norm gradient clipping.
#pragma once

#include "dtcn/autodiff.hpp"

#include <vector>

namespace dtcn {

struct RmspropState {
    double learning_rate = 0.001;
    double decay = 0.9;     // rho
    double epsilon = 1e-8;
    // Per-parameter running mean of squared gradients, aligned with the
    // parameter list passed to rmsprop_step. Lazily sized on first step.
    std::vector<Tensor> mean_square;
};

// Scales all gradients in place so their global L2 norm is at most max_norm.
// Returns the pre-clip norm. max_norm <= 0 disables clipping.
double clip_global_norm(const std::vector<Var>& params, double max_norm);

// ms <- rho*ms + (1-rho)*g^2 ; p <- p - lr*g/(sqrt(ms)+eps)
void rmsprop_step(const std::vector<Var>& params, RmspropState& state);

}  // namespace dtcn
