#include "dtcn/timebase.hpp"

#include <stdexcept>

namespace dtcn {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

// Howard Hinnant's civil-from-days algorithm (proleptic Gregorian).
struct CivilDate {
    int year;
    int month;  // 1..12
    int day;    // 1..31
};

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
            static_cast<int>(d)};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t b) {
    std::int64_t r = a % b;
    return r < 0 ? r + b : r;
}

}  // namespace

std::int64_t unit_duration_seconds(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::MinuteOfHour: return 60;
        case TimeUnit::PeriodOfDay: return 14400;  // 86400 / 6 nominal
        case TimeUnit::DayOfWeek: return 86400;
        case TimeUnit::WeekOfMonth: return 604800;
    }
    throw std::invalid_argument("unknown time unit");
}

const char* unit_name(TimeUnit unit) {
    switch (unit) {
        case TimeUnit::MinuteOfHour: return "1M";
        case TimeUnit::PeriodOfDay: return "1P";
        case TimeUnit::DayOfWeek: return "1D";
        case TimeUnit::WeekOfMonth: return "1W";
    }
    return "?";
}

int period_of_day(int hour) {
    if (hour < 0 || hour > 23) {
        throw std::out_of_range("period_of_day: hour must be in 0..23");
    }
    if (hour < 8) return 5;   // night
    if (hour < 12) return 0;  // morning
    if (hour < 14) return 1;  // lunch
    if (hour < 17) return 2;  // afternoon
    if (hour < 20) return 3;  // dinner
    return 4;                 // evening
}

MultiScaleTimeVector to_multiscale(Timestamp t, std::int64_t tz_offset_seconds) {
    const std::int64_t local = t.epoch_seconds + tz_offset_seconds;
    const std::int64_t days = floor_div(local, kSecondsPerDay);
    const std::int64_t sec_of_day = positive_mod(local, kSecondsPerDay);
    const int hour = static_cast<int>(sec_of_day / 3600);
    const int minute = static_cast<int>((sec_of_day / 60) % 60);

    MultiScaleTimeVector v;
    v.minute_of_hour = minute;
    v.period_of_day = period_of_day(hour);
    // 1970-01-01 is a Thursday; Monday = 0.
    v.day_of_week = static_cast<int>(positive_mod(days + 3, 7));
    const CivilDate date = civil_from_days(days);
    int wom = (date.day - 1) / 7;
    v.week_of_month = wom > 4 ? 4 : wom;
    return v;
}

std::array<double, 4> normalized_time_vector(const MultiScaleTimeVector& v) {
    return {v.minute_of_hour / 59.0, v.period_of_day / 5.0,
            v.day_of_week / 6.0, v.week_of_month / 4.0};
}

BlockPosition block_position(Timestamp t, TimeUnit unit,
                             std::int64_t tz_offset_seconds) {
    const std::int64_t local = t.epoch_seconds + tz_offset_seconds;
    const std::int64_t days = floor_div(local, kSecondsPerDay);
    const MultiScaleTimeVector v = to_multiscale(t, tz_offset_seconds);
    switch (unit) {
        case TimeUnit::MinuteOfHour:
            return {v.minute_of_hour, floor_div(local, 3600)};
        case TimeUnit::PeriodOfDay:
            return {v.period_of_day, days};
        case TimeUnit::DayOfWeek:
            return {v.day_of_week, floor_div(days + 3, 7)};
        case TimeUnit::WeekOfMonth: {
            const CivilDate date = civil_from_days(days);
            return {v.week_of_month,
                    static_cast<std::int64_t>(date.year) * 12 + date.month};
        }
    }
    throw std::invalid_argument("unknown time unit");
}

}  // namespace dtcn
