#include "dtcn/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dtcn {

using nlohmann::json;

SyntheticResult generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
    if (config.n_users <= 0 || config.n_records <= 0 || config.dim_visual == 0 ||
        config.span_days <= 0.0 || config.latent_dim <= 0) {
        throw std::invalid_argument("generate_synthetic: counts and spans must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    SyntheticResult out;
    UserPostSequence& seq = out.sequence;
    seq.dim_visual = config.dim_visual;
    seq.tz_offset_seconds = 0;

    // Periodic tables, zero-mean so the offset stays interpretable.
    for (auto& v : out.weekday_effect) v = gauss(rng) * config.periodic_amplitude;
    for (auto& v : out.period_effect) v = gauss(rng) * config.periodic_amplitude;
    auto center = [](auto& table) {
        double m = 0.0;
        for (double v : table) m += v;
        m /= static_cast<double>(table.size());
        for (auto& v : table) v -= m;
    };
    center(out.weekday_effect);
    center(out.period_effect);

    // Per-user latent codes; component 0 is the base popularity level.
    const int ld = config.latent_dim;
    std::vector<std::vector<double>> user_code(config.n_users, std::vector<double>(ld));
    for (auto& code : user_code) {
        code[0] = gauss(rng) * config.base_amplitude;
        for (int k = 1; k < ld; ++k) code[k] = gauss(rng);
    }
    // Fixed embedding of the latent code into the visual feature space.
    std::vector<double> embed(static_cast<std::size_t>(ld) * config.dim_visual);
    const double embed_scale = 1.0 / std::sqrt(static_cast<double>(ld));
    for (auto& v : embed) v = gauss(rng) * embed_scale;

    // Static per-user profile features.
    std::vector<std::array<double, 5>> user_profile(config.n_users);
    for (int u = 0; u < config.n_users; ++u) {
        const double base = user_code[u][0];
        user_profile[u] = {
            std::pow(2.0, config.popularity_offset + base),  // average views
            std::floor(50.0 + 200.0 * uni(rng)),             // photo count
            std::floor(10.0 + 500.0 * uni(rng)),             // contacts
            std::floor(5.0 + 50.0 * uni(rng)),               // mean group members
            uni(rng) < 0.3 ? 1.0 : 0.0,                      // pro account
        };
    }

    // Posting times, uniform over the span, then time-ordered.
    const double span_seconds = config.span_days * 86400.0;
    std::vector<std::int64_t> times(config.n_records);
    for (auto& t : times) {
        t = config.start_epoch_seconds +
            static_cast<std::int64_t>(uni(rng) * span_seconds);
    }
    std::sort(times.begin(), times.end());

    std::vector<int> users(config.n_records);
    for (auto& u : users) {
        u = static_cast<int>(uni(rng) * config.n_users);
        if (u >= config.n_users) u = config.n_users - 1;
    }

    // AR(1) trend sampled at the sorted posting times (stationary OU).
    const double tau = config.trend_tau_days * 86400.0;
    std::vector<double> trend(config.n_records, 0.0);
    double prev = gauss(rng) * config.trend_amplitude;
    std::int64_t prev_t = times.empty() ? 0 : times[0];
    for (int i = 0; i < config.n_records; ++i) {
        const double dt = static_cast<double>(times[i] - prev_t);
        const double a = std::exp(-dt / tau);
        prev = a * prev + std::sqrt(std::max(0.0, 1.0 - a * a)) *
                              config.trend_amplitude * gauss(rng);
        prev_t = times[i];
        trend[i] = prev;
    }

    seq.records.reserve(config.n_records);
    out.latent_popularity.reserve(config.n_records);
    for (int i = 0; i < config.n_records; ++i) {
        PostRecord rec;
        const int u = users[i];
        rec.user_id = "u" + std::to_string(u);
        rec.post_id = "p" + std::to_string(i);
        rec.timestamp.epoch_seconds = times[i];
        rec.user_features.assign(user_profile[u].begin(), user_profile[u].end());

        rec.visual_features.resize(config.dim_visual);
        for (std::size_t jx = 0; jx < config.dim_visual; ++jx) {
            double v = 0.0;
            for (int k = 0; k < ld; ++k) v += user_code[u][k] * embed[k * config.dim_visual + jx];
            rec.visual_features[jx] = v + config.feature_noise * gauss(rng);
        }

        const auto tv = to_multiscale(rec.timestamp, seq.tz_offset_seconds);
        const double latent = config.popularity_offset + user_code[u][0] +
                              out.weekday_effect[tv.day_of_week] +
                              out.period_effect[tv.period_of_day] + trend[i] +
                              config.noise_level * gauss(rng);
        out.latent_popularity.push_back(latent);

        // Invert s = log2(r/d) + 1 for an explicit per-record d.
        rec.days_since_post = 1.0 + std::floor(uni(rng) * 10.0);
        const double r_real = rec.days_since_post * std::pow(2.0, latent - 1.0);
        rec.view_count = static_cast<std::int64_t>(std::llround(r_real));
        if (rec.view_count < 0) rec.view_count = 0;
        seq.records.push_back(std::move(rec));
    }

    json prov;
    prov["generator"] = "dtcn-synthetic";
    prov["seed"] = seed;
    prov["config"] = {
        {"n_users", config.n_users},
        {"n_records", config.n_records},
        {"dim_visual", config.dim_visual},
        {"span_days", config.span_days},
        {"start_epoch_seconds", config.start_epoch_seconds},
        {"base_amplitude", config.base_amplitude},
        {"periodic_amplitude", config.periodic_amplitude},
        {"trend_amplitude", config.trend_amplitude},
        {"trend_tau_days", config.trend_tau_days},
        {"noise_level", config.noise_level},
        {"popularity_offset", config.popularity_offset},
        {"feature_noise", config.feature_noise},
        {"latent_dim", config.latent_dim},
    };
    prov["weekday_effect"] = out.weekday_effect;
    prov["period_effect"] = out.period_effect;
    out.provenance = prov.dump();
    return out;
}

}  // namespace dtcn
