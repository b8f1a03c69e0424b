// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hems {

/// Proleptic Gregorian calendar date.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01.
    std::int64_t to_days() const;
    static Date from_days(std::int64_t days);
    bool valid() const;

    /// YYYY/MM/DD, the canonical storage form.
    std::string canonical() const;
    /// YYYY-MM-DD
    std::string iso() const;
};

/// Minute of the day in [0, 1440).
struct TimeOfDay {
    int minutes = 0;

    auto operator<=>(const TimeOfDay&) const = default;

    int hour() const { return minutes / 60; }
    int minute() const { return minutes % 60; }

    /// HH:MM, 24-hour.
    std::string canonical() const;
    static std::optional<TimeOfDay> from_hm(int hour, int minute);
};

/// Wall-clock instant without time zone, seconds since 1970-01-01T00:00:00.
struct Instant {
    std::int64_t seconds = 0;

    auto operator<=>(const Instant&) const = default;

    static Instant from(Date date, int minute_of_day, int second = 0);
    Date date() const;
    /// Seconds since local midnight.
    int second_of_day() const;
    /// YYYY-MM-DDTHH:MM:SS
    std::string iso() const;
};

/// Strict parse of YYYY/MM/DD.
std::optional<Date> parse_canonical_date(std::string_view text);
/// Parse YYYY-MM-DD.
std::optional<Date> parse_iso_date(std::string_view text);
/// Parse H:MM or HH:MM (24-hour).
std::optional<TimeOfDay> parse_time_of_day(std::string_view text);
/// Parse YYYY-MM-DDTHH:MM[:SS][Z]; a single space may replace the 'T'.
std::optional<Instant> parse_iso_instant(std::string_view text);

std::string_view month_name(int month);

} // namespace hems
