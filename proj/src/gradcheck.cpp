#include "dtcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dtcn {

GradCheckResult check_gradients(const std::vector<Var>& params,
                                const std::vector<std::string>& names,
                                const LossBuilder& build_loss,
                                const GradCheckOptions& options) {
    // Analytic gradients once.
    for (const auto& p : params) p->grad.fill(0.0);
    {
        Tape tape(true);
        Var loss = build_loss(tape);
        tape.backward(loss);
    }
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p->grad);

    auto loss_at = [&]() {
        Tape tape(false);
        return build_loss(tape)->value[0];
    };

    std::mt19937_64 rng(options.sample_seed);
    GradCheckResult result;
    double worst_excess = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        TapeNode& p = *params[k];
        std::vector<std::size_t> entries(p.value.size());
        std::iota(entries.begin(), entries.end(), 0);
        if (options.max_entries_per_param > 0 &&
            entries.size() > options.max_entries_per_param) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(options.max_entries_per_param);
        }
        for (std::size_t i : entries) {
            const double saved = p.value[i];
            p.value[i] = saved + options.step;
            const double up = loss_at();
            p.value[i] = saved - options.step;
            const double down = loss_at();
            p.value[i] = saved;

            const double numeric = (up - down) / (2.0 * options.step);
            const double a = analytic[k][i];
            ++result.entries_checked;
            const double denom = std::max(std::abs(a), std::abs(numeric));
            const double diff = std::abs(a - numeric);
            // Entry passes when diff <= abs_floor + rel_tol * magnitude; the
            // floor absorbs finite-difference noise on near-zero gradients.
            const double excess = diff / (options.abs_floor + options.rel_tol * denom);
            const double rel = denom > 0.0 ? diff / denom : 0.0;
            if (excess > worst_excess) {
                worst_excess = excess;
                result.max_rel_error = rel;
                result.worst_param = k < names.size() ? names[k] : std::to_string(k);
                result.worst_entry = i;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    result.ok = worst_excess <= 1.0;
    return result;
}

}  // namespace dtcn
