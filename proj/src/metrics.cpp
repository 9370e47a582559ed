#include "dtcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dtcn {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const std::vector<double>& truth,
                               const std::vector<double>& pred) {
    if (truth.size() != pred.size()) throw std::invalid_argument("spearman: length mismatch");
    const std::size_t k = truth.size();
    if (k == 0) throw std::invalid_argument("spearman: empty input");
    // A single sample has no rank variation; undefined like a constant vector.
    if (k < 2) return std::nullopt;
    const std::vector<double> ra = average_ranks(truth);
    const std::vector<double> rb = average_ranks(pred);
    auto mean = [k](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(k);
    };
    const double ma = mean(ra);
    const double mb = mean(rb);
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;  // constant input
    // Algebraically 1/(k-1) * sum of standardized rank products; the (k-1)
    // factors cancel. Written this way, rank sums are exact in binary
    // floating point (ranks are halves), so monotone agreement yields
    // exactly +/-1 at these sizes. Clamp to guard the last ulp.
    const double r = cov / std::sqrt(va * vb);
    return std::clamp(r, -1.0, 1.0);
}

double mae(const std::vector<double>& truth, const std::vector<double>& pred) {
    if (truth.size() != pred.size()) throw std::invalid_argument("mae: length mismatch");
    if (truth.empty()) throw std::invalid_argument("mae: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(truth.size());
}

EvaluationReport aggregate_rounds(std::vector<RoundMetrics> rounds) {
    if (rounds.empty()) throw std::invalid_argument("aggregate_rounds: no rounds");
    EvaluationReport report;
    report.per_round = std::move(rounds);

    std::vector<double> srcs;
    std::vector<double> maes;
    for (const auto& r : report.per_round) {
        if (r.src) srcs.push_back(*r.src);
        maes.push_back(r.mae);
    }
    auto mean_std = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        const double sd = v.size() > 1
                              ? std::sqrt(var / static_cast<double>(v.size() - 1))
                              : 0.0;
        return std::pair<double, double>{m, sd};
    };
    if (!srcs.empty()) {
        auto [m, sd] = mean_std(srcs);
        report.src_mean = m;
        report.src_stddev = sd;
    }
    auto [mm, msd] = mean_std(maes);
    report.mae_mean = mm;
    report.mae_stddev = msd;
    return report;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string("undefined");
}

}  // namespace

std::string report_to_csv(const EvaluationReport& report) {
    std::ostringstream os;
    os << "round_index,src,mae,n_test\n";
    for (const auto& r : report.per_round) {
        os << r.round_index << ',' << fmt_opt(r.src) << ',' << fmt(r.mae) << ','
           << r.n_test << '\n';
    }
    return os.str();
}

std::string report_to_text(const EvaluationReport& report) {
    std::ostringstream os;
    os << "round      src          mae     n_test\n";
    for (const auto& r : report.per_round) {
        os << "  " << r.round_index << "   " << fmt_opt(r.src) << "   " << fmt(r.mae)
           << "   " << r.n_test << '\n';
    }
    os << "mean SRC: " << fmt_opt(report.src_mean)
       << "  (stddev " << fmt_opt(report.src_stddev) << ")\n";
    os << "mean MAE: " << fmt(report.mae_mean) << "  (stddev " << fmt(report.mae_stddev)
       << ")\n";
    return os.str();
}

}  // namespace dtcn
