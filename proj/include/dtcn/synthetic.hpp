// Synthetic user-post stream with planted structure: per-user base level,
// day-of-week / period-of-day periodic effects, and a short-term AR(1)
// trend, inverted through the popularity normalization into view counts.
#pragma once

#include "dtcn/dataset.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace dtcn {

struct SyntheticConfig {
    int n_users = 50;
    int n_records = 5000;
    std::size_t dim_visual = 32;
    double span_days = 120.0;
    std::int64_t start_epoch_seconds = 1483228800;  // 2017-01-01 00:00:00 UTC

    // Amplitudes (standard deviations) of the planted signals.
    double base_amplitude = 1.0;       // per-user level
    double periodic_amplitude = 0.0;   // day-of-week + period-of-day tables
    double trend_amplitude = 0.0;      // AR(1) (Ornstein-Uhlenbeck) trend
    double trend_tau_days = 0.5;       // trend correlation time
    double noise_level = 0.25;         // iid Gaussian on the latent popularity

    double popularity_offset = 6.0;    // keeps view counts well above rounding
    double feature_noise = 0.1;        // per-record noise on visual features
    int latent_dim = 4;                // low-dim code embedded into D_v dims
};

struct SyntheticResult {
    UserPostSequence sequence;
    std::string provenance;  // JSON: config, seed and planted tables
    std::array<double, 7> weekday_effect{};
    std::array<double, 6> period_effect{};
    std::vector<double> latent_popularity;  // per record, before inversion
};

SyntheticResult generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace dtcn
