// Spearman ranking correlation (average-rank ties, sample-std normalization)
// and mean absolute error, plus per-round aggregation for the moving
// partition protocol.
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dtcn {

// Average ranks, 1-based; ties receive the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

// Rank both vectors, then 1/(k-1) * sum of standardized rank products.
// Returns nullopt when either vector is constant or has a single element
// (undefined correlation); never silently reports 0 for these.
std::optional<double> spearman(const std::vector<double>& truth,
                               const std::vector<double>& pred);

double mae(const std::vector<double>& truth, const std::vector<double>& pred);

struct RoundMetrics {
    int round_index = 0;
    std::optional<double> src;
    double mae = 0.0;
    std::size_t n_test = 0;
};

struct EvaluationReport {
    std::vector<RoundMetrics> per_round;
    // SRC aggregates skip rounds whose SRC is undefined.
    std::optional<double> src_mean;
    std::optional<double> src_stddev;
    double mae_mean = 0.0;
    double mae_stddev = 0.0;
};

EvaluationReport aggregate_rounds(std::vector<RoundMetrics> rounds);

std::string report_to_csv(const EvaluationReport& report);
std::string report_to_text(const EvaluationReport& report);

}  // namespace dtcn
