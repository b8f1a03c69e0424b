// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <regex>

namespace hems::extract {

namespace {

const std::regex& re(const char* pattern)
{
    // Patterns are string literals, so the address is a stable cache key.
    thread_local std::vector<std::pair<const char*, std::regex>> cache;
    for (const auto& [key, value] : cache)
        if (key == pattern)
            return value;
    cache.emplace_back(pattern, std::regex(pattern, std::regex::icase | std::regex::ECMAScript));
    return cache.back().second;
}

int to_int(const std::string& text)
{
    int value = 0;
    std::from_chars(text.data(), text.data() + text.size(), value);
    return value;
}

std::string lowercase(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

int month_from_name(const std::string& name)
{
    const std::string key = lowercase(name).substr(0, 3);
    static constexpr std::array<std::string_view, 12> kShort = {"jan", "feb", "mar", "apr", "may", "jun",
                                                                "jul", "aug", "sep", "oct", "nov", "dec"};
    for (std::size_t i = 0; i < kShort.size(); ++i)
        if (key == kShort[i])
            return static_cast<int>(i) + 1;
    return 0;
}

std::optional<Date> make_date(int y, int m, int d)
{
    Date date{y, m, d};
    if (!date.valid())
        return std::nullopt;
    return date;
}

constexpr const char* kMonth =
    "(January|February|March|April|May|June|July|August|September|October|November|December|"
    "Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)";

} // namespace

const std::vector<std::string>& uk_cities()
{
    static const std::vector<std::string> cities = {
        "London",  "Oxford",    "Cambridge", "Manchester", "Birmingham", "Leeds",      "Liverpool",
        "Bristol", "Sheffield", "Newcastle", "Nottingham", "Leicester",  "Southampton", "Brighton",
        "York",    "Bath",      "Exeter",    "Norwich",    "Coventry",   "Reading",    "Plymouth",
        "Derby",   "Durham",    "Lincoln",   "Canterbury", "Edinburgh",  "Glasgow",    "Cardiff",
    };
    return cities;
}

std::optional<Date> find_date(std::string_view input, int default_year)
{
    const std::string text(input);
    std::smatch m;
    if (std::regex_search(text, m, re(R"((?:^|[^\d])(\d{4})[/-](\d{1,2})[/-](\d{1,2})(?!\d))")))
        return make_date(to_int(m[1]), to_int(m[2]), to_int(m[3]));
    if (std::regex_search(text, m, re(R"((?:^|[^\d])(\d{1,2})[/.-](\d{1,2})[/.-](\d{4})(?!\d))")))
        return make_date(to_int(m[3]), to_int(m[2]), to_int(m[1]));

    static const std::string month_first = std::string(kMonth) + R"(\.?,?\s+(\d{1,2})(?:st|nd|rd|th)?(?:,?\s+(\d{4}))?)";
    static const std::string day_first =
        std::string(R"((\d{1,2})(?:st|nd|rd|th)?\s+(?:of\s+)?)") + kMonth + R"((?:,?\s+(\d{4}))?)";
    const std::regex month_re(month_first, std::regex::icase);
    const std::regex day_re(day_first, std::regex::icase);
    std::smatch a;
    std::smatch b;
    const bool has_a = std::regex_search(text, a, month_re);
    const bool has_b = std::regex_search(text, b, day_re);
    if (has_a && (!has_b || a.position(0) <= b.position(0))) {
        const int year = a[3].matched ? to_int(a[3]) : default_year;
        return make_date(year, month_from_name(a[1]), to_int(a[2]));
    }
    if (has_b) {
        const int year = b[3].matched ? to_int(b[3]) : default_year;
        return make_date(year, month_from_name(b[2]), to_int(b[1]));
    }
    return std::nullopt;
}

std::optional<TimeOfDay> find_time(std::string_view input)
{
    const std::string text(input);
    std::smatch m;
    auto meridiem = [](int hour, const std::string& suffix) -> std::optional<int> {
        if (hour < 1 || hour > 12)
            return std::nullopt;
        const bool pm = std::tolower(static_cast<unsigned char>(suffix[0])) == 'p';
        return (hour % 12) + (pm ? 12 : 0);
    };
    if (std::regex_search(text, m, re(R"((?:^|[^\d])(\d{1,2}):(\d{2})(?:\s*([ap])\.?m\.?(?![a-z]))?)"))) {
        int hour = to_int(m[1]);
        const int minute = to_int(m[2]);
        if (m[3].matched) {
            auto h = meridiem(hour, m[3]);
            if (!h)
                return std::nullopt;
            hour = *h;
        }
        return TimeOfDay::from_hm(hour, minute);
    }
    if (std::regex_search(text, m, re(R"((?:^|[^\d:])(\d{1,2})\s*([ap])\.?m\.?(?![a-z]))"))) {
        auto h = meridiem(to_int(m[1]), m[2]);
        if (!h)
            return std::nullopt;
        return TimeOfDay::from_hm(*h, 0);
    }
    const std::string lower = lowercase(text);
    if (lower.find("noon") != std::string::npos)
        return TimeOfDay{12 * 60};
    if (lower.find("midnight") != std::string::npos)
        return TimeOfDay{0};
    return std::nullopt;
}

std::optional<long long> find_integer(std::string_view input)
{
    const std::string text(input);
    std::smatch m;
    if (std::regex_search(text, m, re(R"((?:^|[^\w.:/-])(\d+)(?![\w:/]|\.\d))"))) {
        long long value = 0;
        const std::string digits = m[1];
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec == std::errc())
            return value;
    }
    static constexpr std::array<std::string_view, 21> kWords = {
        "zero",   "one",    "two",     "three",   "four",     "five",    "six",
        "seven",  "eight",  "nine",    "ten",     "eleven",   "twelve",  "thirteen",
        "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
    const std::string lower = lowercase(text);
    std::smatch w;
    std::string rest = lower;
    while (std::regex_search(rest, w, re(R"([a-z]+)"))) {
        for (std::size_t i = 0; i < kWords.size(); ++i)
            if (w.str(0) == kWords[i])
                return static_cast<long long>(i);
        rest = w.suffix();
    }
    return std::nullopt;
}

std::vector<double> find_numbers(std::string_view input)
{
    std::vector<double> out;
    const std::string text(input);
    const auto& pattern = re(R"((?:^|[^\w.:/])(-?\d+(?:\.\d+)?)(?![\w:/]|\.\d))");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
        const std::string token = (*it)[1];
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec == std::errc())
            out.push_back(value);
    }
    return out;
}

std::optional<std::string> find_city(std::string_view input)
{
    const std::string text(input);
    std::optional<std::string> best;
    std::size_t best_pos = std::string::npos;
    for (const auto& city : uk_cities()) {
        std::size_t pos = text.find(city);
        while (pos != std::string::npos) {
            const bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(text[pos - 1]));
            const std::size_t after = pos + city.size();
            const bool right = after >= text.size() || !std::isalpha(static_cast<unsigned char>(text[after]));
            if (left && right)
                break;
            pos = text.find(city, pos + 1);
        }
        if (pos != std::string::npos && pos < best_pos) {
            best = city;
            best_pos = pos;
        }
    }
    if (best)
        return best;
    std::smatch m;
    if (std::regex_search(text, m, std::regex(R"(\bin\s+([A-Z][a-zA-Z'-]+(?:[- ][A-Z][a-zA-Z'-]+)*))")))
        return m[1].str();
    return std::nullopt;
}

} // namespace hems::extract
