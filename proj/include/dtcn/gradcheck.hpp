// Central finite-difference verification of reverse-mode gradients.
// Uses forward evaluation only, so it stays independent of backward().
#pragma once

#include "dtcn/autodiff.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dtcn {

// Builds a fresh graph on the given tape and returns the scalar loss.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
    double step = 1e-4;
    // An entry passes when |analytic - numeric| <= abs_floor + rel_tol *
    // max(|analytic|, |numeric|); the floor absorbs finite-difference noise
    // on near-zero gradients.
    double rel_tol = 1e-5;
    double abs_floor = 1e-8;
    // Check at most this many entries per parameter (0 = all), sampled
    // deterministically from the given seed.
    std::size_t max_entries_per_param = 0;
    std::uint64_t sample_seed = 0;
};

struct GradCheckResult {
    bool ok = true;
    double max_rel_error = 0.0;
    std::size_t entries_checked = 0;
    std::string worst_param;
    std::size_t worst_entry = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

GradCheckResult check_gradients(const std::vector<Var>& params,
                                const std::vector<std::string>& names,
                                const LossBuilder& build_loss,
                                const GradCheckOptions& options = {});

}  // namespace dtcn
