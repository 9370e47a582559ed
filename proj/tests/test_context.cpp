#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtcn/context.hpp"
#include "oracles.hpp"

#include <random>

using namespace dtcn;

namespace {

UserPostSequence make_sequence(const std::vector<std::int64_t>& times,
                               const std::vector<std::string>& users = {}) {
    UserPostSequence seq;
    for (std::size_t i = 0; i < times.size(); ++i) {
        PostRecord r;
        r.post_id = "p" + std::to_string(i);
        r.user_id = users.empty() ? "u0" : users[i];
        r.timestamp.epoch_seconds = times[i];
        seq.records.push_back(r);
    }
    return seq;
}

}  // namespace

TEST_CASE("parse_context_spec round trips and rejects garbage") {
    const auto a = parse_context_spec("NTC:1P:1D");
    CHECK(a.kind == ContextKind::NTC);
    CHECK(a.time_unit == TimeUnit::PeriodOfDay);
    CHECK(a.range_seconds == 86400);
    CHECK(a.length_limit() == doctest::Approx(6.0));
    CHECK(format_context_spec(a) == "NTC:1P:1D");

    const auto b = parse_context_spec("PTC:1D:3W");
    CHECK(b.kind == ContextKind::PTC);
    CHECK(b.time_unit == TimeUnit::DayOfWeek);
    CHECK(b.range_seconds == 3 * 7 * 86400);

    const auto c = parse_context_spec("PTC:1W:1Mo");
    CHECK(c.time_unit == TimeUnit::WeekOfMonth);
    CHECK(c.range_seconds == 30 * 86400);

    const auto d = parse_context_spec("NTC:1M:30M");
    CHECK(d.time_unit == TimeUnit::MinuteOfHour);
    CHECK(d.range_seconds == 30 * 60);
    CHECK(d.length_limit() == doctest::Approx(30.0));

    CHECK_THROWS_AS(parse_context_spec(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("ABC:1P:1D"), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("NTC:2P:1D"), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("NTC:1P"), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("NTC:1P:0D"), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("NTC:1P:-1D"), std::invalid_argument);
    CHECK_THROWS_AS(parse_context_spec("NTC:1P:1X"), std::invalid_argument);
}

TEST_CASE("ntc_member strict threshold") {
    const double l = 6.0;  // 1 day of 4-hour periods
    Timestamp target{10 * 86400};
    CHECK(ntc_member(target, Timestamp{target.epoch_seconds - 1}, TimeUnit::PeriodOfDay, l));
    CHECK(ntc_member(target, Timestamp{target.epoch_seconds - 86399},
                     TimeUnit::PeriodOfDay, l));
    // gap / 14400 == 6 exactly: excluded (strict).
    CHECK_FALSE(ntc_member(target, Timestamp{target.epoch_seconds - 86400},
                           TimeUnit::PeriodOfDay, l));
    // Same timestamp is a valid (zero-gap) neighbor.
    CHECK(ntc_member(target, target, TimeUnit::PeriodOfDay, l));
}

TEST_CASE("ptc_member day scale: same weekday, different week") {
    // 2017-01-02 Monday 09:30 UTC.
    Timestamp target{1483349400};
    // Same Monday, earlier hour: same cycle -> excluded.
    CHECK_FALSE(ptc_member(target, Timestamp{1483349400 - 3600}, TimeUnit::DayOfWeek,
                           30 * 86400));
    // Previous Monday (2016-12-26), any hour: included.
    CHECK(ptc_member(target, Timestamp{1483349400 - 7 * 86400 + 5000},
                     TimeUnit::DayOfWeek, 30 * 86400));
    // Previous Tuesday: different weekday -> excluded.
    CHECK_FALSE(ptc_member(target, Timestamp{1483349400 - 6 * 86400},
                           TimeUnit::DayOfWeek, 30 * 86400));
    // Previous Monday but beyond the range: excluded.
    CHECK_FALSE(ptc_member(target, Timestamp{1483349400 - 5 * 7 * 86400},
                           TimeUnit::DayOfWeek, 30 * 86400));
}

TEST_CASE("ptc_member period scale: same period, different day") {
    Timestamp target{1483349400};  // Monday 09:30, morning
    // Sunday 10:00 (morning, previous day): included.
    CHECK(ptc_member(target, Timestamp{1483349400 - 86400 + 1800},
                     TimeUnit::PeriodOfDay, 7 * 86400));
    // Monday 08:05 same day: same cycle -> excluded.
    CHECK_FALSE(ptc_member(target, Timestamp{1483349400 - 5100},
                           TimeUnit::PeriodOfDay, 7 * 86400));
    // Sunday 13:00 (lunch): different block -> excluded.
    CHECK_FALSE(ptc_member(target, Timestamp{1483349400 - 86400 + 12600},
                           TimeUnit::PeriodOfDay, 7 * 86400));
}

TEST_CASE("ptc_member agrees with the libc-calendar predicate") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> span(86400LL * 365,
                                                     86400LL * 365 * 60);
    std::uniform_int_distribution<std::int64_t> back(1, 86400LL * 40);
    const TimeUnit units[] = {TimeUnit::MinuteOfHour, TimeUnit::PeriodOfDay,
                              TimeUnit::DayOfWeek, TimeUnit::WeekOfMonth};
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t t_p = span(rng);
        const std::int64_t t_s = t_p - back(rng);
        const std::int64_t range = 86400LL * 35;
        for (TimeUnit u : units) {
            const bool got = ptc_member(Timestamp{t_p}, Timestamp{t_s}, u, range);
            const bool want = oracle::ptc_predicate_calendar(t_p, t_s, u, range);
            CHECK(got == want);
        }
    }
}

TEST_CASE("build_context matches brute force on random sequences") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::int64_t> times;
        std::vector<std::string> users;
        std::int64_t t = 86400LL * 17000;
        std::uniform_int_distribution<int> step(0, 30000);
        std::uniform_int_distribution<int> user(0, 3);
        for (int i = 0; i < 120; ++i) {
            t += step(rng);
            times.push_back(t);
            users.push_back("u" + std::to_string(user(rng)));
        }
        const auto seq = make_sequence(times, users);
        for (const char* text : {"NTC:1P:1D", "NTC:1M:45M", "PTC:1P:1W", "PTC:1D:3W"}) {
            auto spec = parse_context_spec(text);
            spec.max_items = 5;
            spec.per_user = trial % 2 == 0;
            for (std::size_t target : {std::size_t{0}, std::size_t{40},
                                       std::size_t{119}}) {
                const auto ctx = build_context(seq, target, spec);
                const auto want = oracle::brute_force_context(seq, target, spec);
                REQUIRE(ctx.items.size() == want.size());
                for (std::size_t k = 0; k < want.size(); ++k) {
                    CHECK(ctx.items[k].record_index == want[k]);
                }
            }
        }
    }
}

TEST_CASE("build_context output is ascending and capped") {
    std::vector<std::int64_t> times;
    for (int i = 0; i < 50; ++i) times.push_back(86400LL * 17000 + i * 600);
    const auto seq = make_sequence(times);
    auto spec = parse_context_spec("NTC:1M:45M");
    spec.max_items = 3;
    const auto ctx = build_context(seq, 49, spec);
    REQUIRE(ctx.items.size() == 3);
    // The most recent three of the qualifying history, ascending.
    CHECK(ctx.items[0].record_index == 46);
    CHECK(ctx.items[2].record_index == 48);
    CHECK(ctx.items[0].timestamp < ctx.items[2].timestamp);
}

TEST_CASE("build_context: first record has an empty context") {
    const auto seq = make_sequence({1000, 2000});
    const auto ctx = build_context(seq, 0, parse_context_spec("NTC:1P:1D"));
    CHECK(ctx.items.empty());
}

TEST_CASE("build_context treats equal-timestamp earlier records as history") {
    const auto seq = make_sequence({1000, 86400LL * 17000, 86400LL * 17000});
    const auto ctx = build_context(seq, 2, parse_context_spec("NTC:1P:1D"));
    REQUIRE(ctx.items.size() == 1);
    CHECK(ctx.items[0].record_index == 1);
    // ...but not later file positions at the same timestamp.
    const auto ctx1 = build_context(seq, 1, parse_context_spec("NTC:1P:1D"));
    CHECK(ctx1.items.empty());
}

TEST_CASE("per_user filters foreign posts") {
    const auto seq = make_sequence({1000, 1100, 1200, 1300},
                                   {"a", "b", "a", "a"});
    auto spec = parse_context_spec("NTC:1M:30M");
    spec.per_user = true;
    const auto ctx = build_context(seq, 3, spec);
    REQUIRE(ctx.items.size() == 2);
    CHECK(ctx.items[0].record_index == 0);
    CHECK(ctx.items[1].record_index == 2);
}

TEST_CASE("context items carry the candidate's own time vector") {
    const auto seq = make_sequence({1483349400 - 3600, 1483349400});
    const auto ctx = build_context(seq, 1, parse_context_spec("NTC:1P:1D"));
    REQUIRE(ctx.items.size() == 1);
    CHECK(ctx.items[0].time_vector ==
          to_multiscale(Timestamp{1483349400 - 3600}));
    CHECK(ctx.target_index == 1);
}
