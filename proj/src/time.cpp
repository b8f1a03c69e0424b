// SPDX-License-Identifier: Apache-2.0
#include "hems/time.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace hems {

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, int m, int d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int days_in_month(int year, int month)
{
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)))
        return 29;
    return kDays[static_cast<std::size_t>(month - 1)];
}

std::optional<int> parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len)
{
    if (pos + len > text.size())
        return std::nullopt;
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9')
            return std::nullopt;
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

std::optional<Date> parse_date_with(std::string_view text, char separator)
{
    if (text.size() != 10 || text[4] != separator || text[7] != separator)
        return std::nullopt;
    auto y = parse_fixed_int(text, 0, 4);
    auto m = parse_fixed_int(text, 5, 2);
    auto d = parse_fixed_int(text, 8, 2);
    if (!y || !m || !d)
        return std::nullopt;
    Date date{*y, *m, *d};
    if (!date.valid())
        return std::nullopt;
    return date;
}

} // namespace

std::int64_t Date::to_days() const { return days_from_civil(year, month, day); }

Date Date::from_days(std::int64_t z)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool Date::valid() const
{
    return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::string Date::canonical() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d/%02d/%02d", year, month, day);
    return buf;
}

std::string Date::iso() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string TimeOfDay::canonical() const
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%02d:%02d", hour(), minute());
    return buf;
}

std::optional<TimeOfDay> TimeOfDay::from_hm(int hour, int minute)
{
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59)
        return std::nullopt;
    return TimeOfDay{hour * 60 + minute};
}

Instant Instant::from(Date date, int minute_of_day, int second)
{
    return Instant{date.to_days() * 86400 + minute_of_day * 60 + second};
}

Date Instant::date() const
{
    std::int64_t days = seconds >= 0 ? seconds / 86400 : -((-seconds + 86399) / 86400);
    return Date::from_days(days);
}

int Instant::second_of_day() const
{
    auto r = seconds % 86400;
    return static_cast<int>(r < 0 ? r + 86400 : r);
}

std::string Instant::iso() const
{
    const int sod = second_of_day();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", date().iso().c_str(), sod / 3600, (sod / 60) % 60, sod % 60);
    return buf;
}

std::optional<Date> parse_canonical_date(std::string_view text) { return parse_date_with(text, '/'); }

std::optional<Date> parse_iso_date(std::string_view text) { return parse_date_with(text, '-'); }

std::optional<TimeOfDay> parse_time_of_day(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2 || text.size() != colon + 3)
        return std::nullopt;
    auto h = parse_fixed_int(text, 0, colon);
    auto m = parse_fixed_int(text, colon + 1, 2);
    if (!h || !m)
        return std::nullopt;
    return TimeOfDay::from_hm(*h, *m);
}

std::optional<Instant> parse_iso_instant(std::string_view text)
{
    if (!text.empty() && text.back() == 'Z')
        text.remove_suffix(1);
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' '))
        return std::nullopt;
    auto date = parse_iso_date(text.substr(0, 10));
    if (!date)
        return std::nullopt;
    auto rest = text.substr(11);
    int second = 0;
    if (rest.size() == 8) {
        if (rest[5] != ':')
            return std::nullopt;
        auto s = parse_fixed_int(rest, 6, 2);
        if (!s || *s > 59)
            return std::nullopt;
        second = *s;
        rest = rest.substr(0, 5);
    }
    if (rest.size() != 5)
        return std::nullopt;
    auto tod = parse_time_of_day(rest);
    if (!tod)
        return std::nullopt;
    return Instant::from(*date, tod->minutes, second);
}

std::string_view month_name(int month)
{
    static constexpr std::array<std::string_view, 12> kNames = {"January", "February", "March",     "April",
                                                                "May",     "June",     "July",      "August",
                                                                "September", "October", "November", "December"};
    if (month < 1 || month > 12)
        return {};
    return kNames[static_cast<std::size_t>(month - 1)];
}

} // namespace hems
