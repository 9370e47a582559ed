#include "dtcn/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dtcn {

using nlohmann::json;

NormalizedPopularity normalize_popularity(std::int64_t view_count, double days) {
    if (days <= 0.0) throw std::invalid_argument("normalize_popularity: days must be > 0");
    if (view_count < 0) throw std::invalid_argument("normalize_popularity: negative view count");
    NormalizedPopularity out;
    std::int64_t r = view_count;
    if (r == 0) {
        r = 1;
        out.zero_view_adjusted = true;
    }
    out.value = std::log2(static_cast<double>(r) / days) + 1.0;
    return out;
}

namespace {

std::vector<double> parse_real_array(const json& j, const char* field,
                                     std::size_t line_no) {
    if (!j.is_array()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": field '" +
                                 field + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

}  // namespace

UserPostSequence load_sequence(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset file " + path);

    UserPostSequence seq;
    // Sidecar is optional; D_v falls back to the first record's width.
    std::ifstream meta_is(path + ".meta.json");
    if (meta_is) {
        json meta = json::parse(meta_is);
        seq.dim_visual = meta.value("dim_visual", std::size_t{0});
        seq.tz_offset_seconds = meta.value("tz_offset_seconds", std::int64_t{0});
    }

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": malformed record: " + e.what());
        }
        PostRecord rec;
        try {
            rec.user_id = j.at("user_id").get<std::string>();
            rec.post_id = j.at("post_id").get<std::string>();
            rec.timestamp.epoch_seconds = j.at("timestamp").get<std::int64_t>();
            rec.user_features = parse_real_array(j.at("user_features"), "user_features", line_no);
            rec.visual_features =
                parse_real_array(j.at("visual_features"), "visual_features", line_no);
            rec.view_count = j.at("view_count").get<std::int64_t>();
            rec.days_since_post = j.at("days_since_post").get<double>();
        } catch (const json::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": missing or mistyped field: " + e.what());
        }
        if (rec.timestamp.epoch_seconds < 0) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": negative timestamp");
        }
        if (rec.user_features.size() != 5) {
            throw std::runtime_error("record " + rec.post_id + " (line " +
                                     std::to_string(line_no) + "): user_features has " +
                                     std::to_string(rec.user_features.size()) +
                                     " entries, expected 5");
        }
        if (seq.dim_visual == 0) seq.dim_visual = rec.visual_features.size();
        if (rec.visual_features.size() != seq.dim_visual) {
            throw std::runtime_error("record " + rec.post_id + " (line " +
                                     std::to_string(line_no) + "): visual_features has " +
                                     std::to_string(rec.visual_features.size()) +
                                     " entries, expected " + std::to_string(seq.dim_visual));
        }
        if (rec.view_count < 0) {
            throw std::runtime_error("record " + rec.post_id + ": negative view_count");
        }
        if (rec.days_since_post <= 0.0) {
            throw std::runtime_error("record " + rec.post_id + ": days_since_post must be > 0");
        }
        seq.records.push_back(std::move(rec));
    }
    std::stable_sort(seq.records.begin(), seq.records.end(),
                     [](const PostRecord& a, const PostRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return seq;
}

void save_sequence(const std::string& path, const UserPostSequence& seq,
                   const std::string& provenance) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& rec : seq.records) {
        json j;
        j["user_id"] = rec.user_id;
        j["post_id"] = rec.post_id;
        j["timestamp"] = rec.timestamp.epoch_seconds;
        j["user_features"] = rec.user_features;
        j["visual_features"] = rec.visual_features;
        j["view_count"] = rec.view_count;
        j["days_since_post"] = rec.days_since_post;
        os << j.dump() << '\n';
    }
    json meta;
    meta["dim_visual"] = seq.dim_visual;
    meta["tz_offset_seconds"] = seq.tz_offset_seconds;
    if (!provenance.empty()) meta["provenance"] = json::parse(provenance);
    std::ofstream meta_os(path + ".meta.json", std::ios::trunc);
    meta_os << meta.dump(2) << '\n';
    if (!os || !meta_os) throw std::runtime_error("write failure on " + path);
}

std::vector<PartitionRound> moving_partition(const UserPostSequence& seq,
                                             int parts, int window) {
    if (parts <= 0 || window <= 0 || window > parts) {
        throw std::invalid_argument("moving_partition: need 0 < window <= parts");
    }
    const std::size_t n = seq.size();
    if (n < static_cast<std::size_t>(parts)) {
        throw std::invalid_argument("moving_partition: sequence shorter than part count");
    }
    // Contiguous near-equal parts; earlier parts absorb the remainder.
    std::vector<std::size_t> bounds(parts + 1, 0);
    const std::size_t base = n / parts;
    const std::size_t rem = n % parts;
    for (int p = 0; p < parts; ++p) {
        bounds[p + 1] = bounds[p] + base + (static_cast<std::size_t>(p) < rem ? 1 : 0);
    }
    const int rounds = parts - window + 1;
    std::vector<PartitionRound> out;
    out.reserve(rounds);
    for (int k = 0; k < rounds; ++k) {
        PartitionRound r;
        r.round_index = k + 1;
        r.train_begin = bounds[k];
        r.train_end = bounds[k + window - 1];
        r.test_begin = bounds[k + window - 1];
        r.test_end = bounds[k + window];
        out.push_back(r);
    }
    return out;
}

DatasetStats dataset_stats(const UserPostSequence& seq) {
    if (seq.records.empty()) throw std::invalid_argument("dataset_stats: empty sequence");
    DatasetStats s;
    s.count = seq.size();
    std::int64_t tmin = seq.records.front().timestamp.epoch_seconds;
    std::int64_t tmax = tmin;
    std::vector<double> pops;
    pops.reserve(seq.size());
    s.minute_hist.assign(60, 0);
    s.period_hist.assign(6, 0);
    s.weekday_hist.assign(7, 0);
    s.week_hist.assign(5, 0);
    for (const auto& rec : seq.records) {
        tmin = std::min(tmin, rec.timestamp.epoch_seconds);
        tmax = std::max(tmax, rec.timestamp.epoch_seconds);
        pops.push_back(normalize_popularity(rec.view_count, rec.days_since_post).value);
        const auto tv = to_multiscale(rec.timestamp, seq.tz_offset_seconds);
        ++s.minute_hist[tv.minute_of_hour];
        ++s.period_hist[tv.period_of_day];
        ++s.weekday_hist[tv.day_of_week];
        ++s.week_hist[tv.week_of_month];
    }
    s.span_seconds = tmax - tmin;
    std::sort(pops.begin(), pops.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(pops.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, pops.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return pops[lo] * (1.0 - frac) + pops[hi] * frac;
    };
    s.pop_min = pops.front();
    s.pop_q25 = quantile(0.25);
    s.pop_median = quantile(0.5);
    s.pop_q75 = quantile(0.75);
    s.pop_max = pops.back();
    return s;
}

std::string stats_to_csv(const DatasetStats& s) {
    std::ostringstream os;
    os << "metric,value\n";
    os << "count," << s.count << '\n';
    os << "span_seconds," << s.span_seconds << '\n';
    os << "pop_min," << s.pop_min << '\n';
    os << "pop_q25," << s.pop_q25 << '\n';
    os << "pop_median," << s.pop_median << '\n';
    os << "pop_q75," << s.pop_q75 << '\n';
    os << "pop_max," << s.pop_max << '\n';
    auto hist = [&os](const char* name, const std::vector<std::size_t>& h) {
        os << '\n' << name << ",count\n";
        for (std::size_t i = 0; i < h.size(); ++i) os << i << ',' << h[i] << '\n';
    };
    hist("minute_of_hour", s.minute_hist);
    hist("period_of_day", s.period_hist);
    hist("day_of_week", s.weekday_hist);
    hist("week_of_month", s.week_hist);
    return os.str();
}

}  // namespace dtcn
