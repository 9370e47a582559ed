// On-disk record format, popularity normalization (log2(r/d)+1) and the
// moving-partition train/test protocol.
#pragma once

#include "dtcn/timebase.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtcn {

struct PostRecord {
    std::string user_id;
    std::string post_id;
    Timestamp timestamp;
    std::vector<double> user_features;    // length 5
    std::vector<double> visual_features;  // length D_v
    std::int64_t view_count = 0;
    double days_since_post = 1.0;
};

struct NormalizedPopularity {
    double value = 0.0;
    bool zero_view_adjusted = false;  // r=0 replaced by r+1
};

// s = log2(r/d) + 1. r=0 is substituted by r+1 (flagged); d <= 0 rejected.
NormalizedPopularity normalize_popularity(std::int64_t view_count, double days);

struct UserPostSequence {
    std::vector<PostRecord> records;  // ascending by timestamp
    std::size_t dim_visual = 0;
    std::int64_t tz_offset_seconds = 0;

    std::size_t size() const { return records.size(); }
    double popularity(std::size_t i) const {
        return normalize_popularity(records[i].view_count, records[i].days_since_post).value;
    }
};

// Sidecar metadata written next to the dataset file as <path>.meta.json.
struct DatasetMeta {
    std::size_t dim_visual = 0;
    std::int64_t tz_offset_seconds = 0;
    std::string provenance;  // free-form JSON text from the generator
};

// One line per record, JSON object with fields: user_id, post_id, timestamp,
// user_features, visual_features, view_count, days_since_post.
// Records are validated and stably sorted ascending by timestamp.
UserPostSequence load_sequence(const std::string& path);
void save_sequence(const std::string& path, const UserPostSequence& seq,
                   const std::string& provenance);

struct PartitionRound {
    int round_index = 0;                // 1-based
    std::size_t train_begin = 0;        // [train_begin, train_end)
    std::size_t train_end = 0;
    std::size_t test_begin = 0;         // [test_begin, test_end)
    std::size_t test_end = 0;
};

// Splits the sequence into `parts` contiguous near-equal parts (earlier parts
// take the remainder); round k trains on parts k..k+window-2 and tests on
// part k+window-1. Defaults give 5 rounds at a 9:1 train:test ratio.
std::vector<PartitionRound> moving_partition(const UserPostSequence& seq,
                                             int parts = 14, int window = 10);

struct DatasetStats {
    std::size_t count = 0;
    std::int64_t span_seconds = 0;
    double pop_min = 0, pop_q25 = 0, pop_median = 0, pop_q75 = 0, pop_max = 0;
    std::vector<std::size_t> minute_hist;   // 60 bins
    std::vector<std::size_t> period_hist;   // 6 bins
    std::vector<std::size_t> weekday_hist;  // 7 bins
    std::vector<std::size_t> week_hist;     // 5 bins
};

DatasetStats dataset_stats(const UserPostSequence& seq);
// Comma-separated tables: one section per histogram plus the summary row.
std::string stats_to_csv(const DatasetStats& s);

}  // namespace dtcn
