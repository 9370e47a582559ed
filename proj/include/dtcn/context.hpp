// Neighboring (NTC) and Periodic (PTC) temporal-context construction.
//
// NTC keeps strictly-historical items whose gap to the target is under
// l time units; PTC keeps items in the same recurring block (same period
// of a different day, same weekday of a different week, ...) within a
// bounded range.
#pragma once

#include "dtcn/dataset.hpp"
#include "dtcn/timebase.hpp"

#include <string>
#include <vector>

namespace dtcn {

enum class ContextKind { NTC, PTC };

struct ContextSpec {
    ContextKind kind = ContextKind::NTC;
    TimeUnit time_unit = TimeUnit::PeriodOfDay;
    std::int64_t range_seconds = 86400;  // t_r
    std::size_t max_items = 32;          // cap on context length
    bool per_user = false;               // restrict history to the target's user

    // NTC threshold l = range / unit duration.
    double length_limit() const {
        return static_cast<double>(range_seconds) /
               static_cast<double>(unit_duration_seconds(time_unit));
    }
};

// Parses "NTC:1P:1D" / "PTC:1D:3W"; range suffixes M (minute), P (period),
// D (day), W (week), Mo (month, 30 days), e.g. "0.5D", "3W".
ContextSpec parse_context_spec(const std::string& text);
std::string format_context_spec(const ContextSpec& spec);

struct ContextItem {
    std::size_t record_index = 0;
    Timestamp timestamp;
    MultiScaleTimeVector time_vector;
};

struct TemporalContext {
    std::vector<ContextItem> items;  // ascending in time
    std::size_t target_index = 0;
};

// True iff (t_p - t_s) / unit_duration < l, strict. Requires t_s <= t_p.
bool ntc_member(Timestamp target, Timestamp candidate, TimeUnit unit, double length_limit);

// True iff candidate shares the target's block at this unit, lies in a
// different enclosing cycle, and is at most range_seconds old.
// Requires t_s < t_p.
bool ptc_member(Timestamp target, Timestamp candidate, TimeUnit unit,
                std::int64_t range_seconds, std::int64_t tz_offset_seconds = 0);

// Scans records strictly before the target (equal timestamps earlier in file
// order count as history), applies the spec's membership test, truncates to
// the most recent max_items and returns them in ascending time order.
TemporalContext build_context(const UserPostSequence& seq, std::size_t target,
                              const ContextSpec& spec);

}  // namespace dtcn
