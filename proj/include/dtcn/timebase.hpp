// Multi-scale time representation: minute-of-hour, period-of-day,
// day-of-week and week-of-month views of a shared timestamp stream.
#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace dtcn {

// Seconds since the Unix epoch, interpreted in one fixed configured
// UTC offset for the whole run. Total order = order of epoch_seconds.
struct Timestamp {
    std::int64_t epoch_seconds = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

enum class TimeUnit { MinuteOfHour, PeriodOfDay, DayOfWeek, WeekOfMonth };

// Nominal unit durations in seconds. PeriodOfDay periods have unequal real
// lengths; the nominal value 86400/6 keeps gap/duration quotients well-defined.
std::int64_t unit_duration_seconds(TimeUnit unit);

const char* unit_name(TimeUnit unit);

// Four-component time vector (t_1M, t_1P, t_1D, t_1W).
struct MultiScaleTimeVector {
    int minute_of_hour = 0;  // 0..59
    int period_of_day = 0;   // 0..5
    int day_of_week = 0;     // 0 = Monday .. 6 = Sunday
    int week_of_month = 0;   // 0..4

    friend bool operator==(const MultiScaleTimeVector&,
                           const MultiScaleTimeVector&) = default;
};

// Six-segment day: morning [8,12) -> 0, lunch [12,14) -> 1,
// afternoon [14,17) -> 2, dinner [17,20) -> 3, evening [20,24) -> 4,
// night [0,8) -> 5. Boundary hours belong to the later interval.
// Throws std::out_of_range for hour outside 0..23.
int period_of_day(int hour);

// Calendar decomposition of t at the given fixed UTC offset.
// week_of_month = (day_of_month - 1) / 7, clamped to 0..4.
MultiScaleTimeVector to_multiscale(Timestamp t, std::int64_t tz_offset_seconds = 0);

// Componentwise division by the range maxima (59, 5, 6, 4); values in [0,1].
std::array<double, 4> normalized_time_vector(const MultiScaleTimeVector& v);

// Index of the recurring block a timestamp falls in at the given scale
// (minute, period, weekday, week-of-month) plus the index of its enclosing
// cycle (hour, day, week, month). Used by periodic-context membership.
struct BlockPosition {
    int block = 0;
    std::int64_t cycle = 0;
};
BlockPosition block_position(Timestamp t, TimeUnit unit,
                             std::int64_t tz_offset_seconds = 0);

}  // namespace dtcn
