#include "dtcn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dtcn {

double clip_global_norm(const std::vector<Var>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) sq += p->grad[i] * p->grad[i];
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (const auto& p : params) {
            for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
        }
    }
    return norm;
}

void rmsprop_step(const std::vector<Var>& params, RmspropState& state) {
    if (state.mean_square.empty()) {
        state.mean_square.reserve(params.size());
        for (const auto& p : params) {
            state.mean_square.push_back(
                p->value.rank() == 1 ? Tensor(p->value.size())
                                     : Tensor(p->value.rows(), p->value.shape()[1]));
        }
    }
    if (state.mean_square.size() != params.size()) {
        throw std::invalid_argument("rmsprop_step: state/parameter count mismatch");
    }
    const double rho = state.decay;
    for (std::size_t k = 0; k < params.size(); ++k) {
        TapeNode& p = *params[k];
        Tensor& ms = state.mean_square[k];
        if (ms.size() != p.value.size()) {
            throw std::invalid_argument("rmsprop_step: state shape mismatch");
        }
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            ms[i] = rho * ms[i] + (1.0 - rho) * g * g;
            p.value[i] -= state.learning_rate * g / (std::sqrt(ms[i]) + state.epsilon);
        }
    }
}

}  // namespace dtcn
