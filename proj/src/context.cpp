#include "dtcn/context.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtcn {

namespace {

TimeUnit parse_unit(const std::string& s) {
    if (s == "1M") return TimeUnit::MinuteOfHour;
    if (s == "1P") return TimeUnit::PeriodOfDay;
    if (s == "1D") return TimeUnit::DayOfWeek;
    if (s == "1W") return TimeUnit::WeekOfMonth;
    throw std::invalid_argument("context spec: unknown time unit '" + s + "'");
}

std::int64_t parse_range_seconds(const std::string& s) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("context spec: bad range '" + s + "'");
    }
    const std::string suffix = s.substr(pos);
    double unit_seconds = 0.0;
    if (suffix == "M") unit_seconds = 60.0;
    else if (suffix == "P") unit_seconds = 14400.0;
    else if (suffix == "D") unit_seconds = 86400.0;
    else if (suffix == "W") unit_seconds = 604800.0;
    else if (suffix == "Mo") unit_seconds = 2592000.0;  // 30 days
    else throw std::invalid_argument("context spec: bad range suffix in '" + s + "'");
    if (value <= 0.0) throw std::invalid_argument("context spec: range must be positive");
    return static_cast<std::int64_t>(std::llround(value * unit_seconds));
}

}  // namespace

ContextSpec parse_context_spec(const std::string& text) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw std::invalid_argument("context spec '" + text + "': expected KIND:UNIT:RANGE");
    }
    ContextSpec spec;
    const std::string kind = text.substr(0, c1);
    if (kind == "NTC") spec.kind = ContextKind::NTC;
    else if (kind == "PTC") spec.kind = ContextKind::PTC;
    else throw std::invalid_argument("context spec: unknown kind '" + kind + "'");
    spec.time_unit = parse_unit(text.substr(c1 + 1, c2 - c1 - 1));
    spec.range_seconds = parse_range_seconds(text.substr(c2 + 1));
    return spec;
}

std::string format_context_spec(const ContextSpec& spec) {
    std::string out = spec.kind == ContextKind::NTC ? "NTC:" : "PTC:";
    out += unit_name(spec.time_unit);
    out += ':';
    // Largest round unit that divides the range evenly.
    struct Suffix {
        std::int64_t seconds;
        const char* name;
    };
    static constexpr Suffix kSuffixes[] = {{2592000, "Mo"}, {604800, "W"},
                                           {86400, "D"},    {14400, "P"},
                                           {60, "M"}};
    for (const auto& s : kSuffixes) {
        if (spec.range_seconds % s.seconds == 0) {
            out += std::to_string(spec.range_seconds / s.seconds);
            out += s.name;
            return out;
        }
    }
    throw std::invalid_argument("format_context_spec: range not a whole number of minutes");
}

bool ntc_member(Timestamp target, Timestamp candidate, TimeUnit unit,
                double length_limit) {
    if (candidate > target) {
        throw std::invalid_argument("ntc_member: candidate after target");
    }
    const double gap = static_cast<double>(target.epoch_seconds - candidate.epoch_seconds);
    return gap / static_cast<double>(unit_duration_seconds(unit)) < length_limit;
}

bool ptc_member(Timestamp target, Timestamp candidate, TimeUnit unit,
                std::int64_t range_seconds, std::int64_t tz_offset_seconds) {
    if (candidate >= target) {
        throw std::invalid_argument("ptc_member: candidate not strictly before target");
    }
    if (target.epoch_seconds - candidate.epoch_seconds > range_seconds) return false;
    const BlockPosition p = block_position(target, unit, tz_offset_seconds);
    const BlockPosition s = block_position(candidate, unit, tz_offset_seconds);
    return p.block == s.block && p.cycle != s.cycle;
}

TemporalContext build_context(const UserPostSequence& seq, std::size_t target,
                              const ContextSpec& spec) {
    if (target >= seq.size()) throw std::out_of_range("build_context: bad target index");
    const PostRecord& tgt = seq.records[target];
    TemporalContext ctx;
    ctx.target_index = target;

    // Newest-first scan so truncation keeps the most recent items. NTC
    // membership is monotone in the gap and PTC is bounded by its range, so
    // the scan stops once the gap can no longer qualify.
    std::vector<ContextItem> picked;
    for (std::size_t i = target; i-- > 0;) {
        const PostRecord& cand = seq.records[i];
        const double gap =
            static_cast<double>(tgt.timestamp.epoch_seconds - cand.timestamp.epoch_seconds);
        bool keep = false;
        if (spec.kind == ContextKind::NTC) {
            if (gap / static_cast<double>(unit_duration_seconds(spec.time_unit)) >=
                spec.length_limit()) {
                break;
            }
            keep = true;
        } else {
            if (gap > static_cast<double>(spec.range_seconds)) break;
            keep = cand.timestamp < tgt.timestamp &&
                   ptc_member(tgt.timestamp, cand.timestamp, spec.time_unit,
                              spec.range_seconds, seq.tz_offset_seconds);
        }
        if (spec.per_user && cand.user_id != tgt.user_id) keep = false;
        if (keep) {
            ContextItem item;
            item.record_index = i;
            item.timestamp = cand.timestamp;
            item.time_vector = to_multiscale(cand.timestamp, seq.tz_offset_seconds);
            picked.push_back(item);
            if (picked.size() == spec.max_items) break;
        }
    }
    ctx.items.assign(picked.rbegin(), picked.rend());
    return ctx;
}

}  // namespace dtcn
