// SPDX-License-Identifier: Apache-2.0
#include "hems/synth/synth.hpp"

#include "hems/error.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace hems::synth {

namespace {

constexpr std::array<double, 12> kMonthlyMeanTemp = {5.0, 5.5, 7.5, 9.5, 12.5, 15.5, 17.5, 17.0, 14.5, 11.0, 7.5, 5.5};
constexpr std::array<double, 12> kDaylightHours = {8.0, 9.5, 11.5, 13.5, 15.5, 16.5, 16.0, 14.5, 12.5, 10.5, 8.5, 7.5};
constexpr std::array<double, 12> kSolarSeason = {0.3, 0.4, 0.6, 0.8, 0.95, 1.0, 1.0, 0.9, 0.7, 0.5, 0.35, 0.25};
constexpr double kSolarPeakKw = 3.5;
constexpr double kSolarNoon = 12.5;

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

// Portable draws: only the mt19937_64 bit stream is relied upon.
class Noise {
public:
    explicit Noise(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

bool in_cyclic_window(int minute, int start, int end)
{
    return start < end ? (minute >= start && minute < end) : (minute >= start || minute < end);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string trim(std::string text)
{
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ' || text.back() == '\t'))
        text.pop_back();
    std::size_t start = 0;
    while (start < text.size() && (text[start] == ' ' || text[start] == '\t'))
        ++start;
    return text.substr(start);
}

double parse_number(const std::string& cell, std::size_t line, const char* column)
{
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+')
        ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty())
        throw ParseError(std::string("invalid number '") + cell + "' in column " + column, line);
    return value;
}

} // namespace

void TariffSpec::validate() const
{
    if (!(feedin_price <= offpeak_price && offpeak_price <= peak_price))
        throw InvalidArgument("tariff requires feedin_price <= offpeak_price <= peak_price");
    if (offpeak_start == offpeak_end)
        throw InvalidArgument("off-peak window must not be empty");
}

std::vector<Instant> make_timestamps(Date first, Date last, double dt_hours)
{
    if (!(dt_hours > 0.0))
        throw InvalidArgument("dt must be positive");
    if (last < first)
        throw InvalidArgument("first date must not be after last date");
    const auto step = static_cast<std::int64_t>(std::llround(dt_hours * 3600.0));
    const Instant begin = Instant::from(first, 0);
    const Instant end = Instant::from(Date::from_days(last.to_days() + 1), 0);
    std::vector<Instant> out;
    for (auto t = begin.seconds; t < end.seconds; t += step)
        out.push_back(Instant{t});
    return out;
}

PriceSeries economy7_prices(const TariffSpec& spec, const std::vector<Instant>& timestamps)
{
    spec.validate();
    PriceSeries prices;
    prices.pi_e.reserve(timestamps.size());
    prices.pi_s.assign(timestamps.size(), spec.feedin_price);
    for (const auto& t : timestamps) {
        const int minute = t.second_of_day() / 60;
        const bool cheap = in_cyclic_window(minute, spec.offpeak_start.minutes, spec.offpeak_end.minutes);
        prices.pi_e.push_back(cheap ? spec.offpeak_price : spec.peak_price);
    }
    return prices;
}

double city_climate_offset(std::string_view city)
{
    const std::uint64_t hash = fnv1a(city);
    return static_cast<double>(hash % 3001) / 1000.0 - 1.5;
}

WeatherSeries synth_weather_solar_load(std::string_view city, const std::vector<Instant>& timestamps,
                                       double dt_hours, std::uint64_t seed)
{
    WeatherSeries out;
    out.t_ext.reserve(timestamps.size());
    out.p_solar.reserve(timestamps.size());
    out.p_other.reserve(timestamps.size());

    const double offset = city_climate_offset(city);
    Noise noise(seed);
    std::int64_t current_day = std::numeric_limits<std::int64_t>::min();
    double day_shift = 0.0;
    double cloud = 1.0;
    for (const auto& t : timestamps) {
        const Date date = t.date();
        if (date.to_days() != current_day) {
            current_day = date.to_days();
            day_shift = 1.2 * noise.normal();
            cloud = 0.35 + 0.65 * noise.uniform();
        }
        const auto month = static_cast<std::size_t>(date.month - 1);
        const double hour = t.second_of_day() / 3600.0 + 0.5 * dt_hours;

        const double diurnal = 4.0 * std::cos(2.0 * std::numbers::pi * (hour - 15.0) / 24.0);
        out.t_ext.push_back(kMonthlyMeanTemp[month] + offset + day_shift + diurnal + 0.3 * noise.normal());

        const double daylight = kDaylightHours[month];
        const double sunrise = kSolarNoon - daylight / 2.0;
        const double phase = (hour - sunrise) / daylight;
        double solar = 0.0;
        if (phase > 0.0 && phase < 1.0) {
            const double bell = std::sin(std::numbers::pi * phase);
            solar = kSolarPeakKw * kSolarSeason[month] * cloud * bell * bell;
        }
        out.p_solar.push_back(solar);

        const double morning = 0.6 * std::exp(-std::pow((hour - 7.5) / 1.0, 2));
        const double evening = 1.2 * std::exp(-std::pow((hour - 18.5) / 1.5, 2));
        out.p_other.push_back(0.25 + morning + evening + 0.1 * noise.uniform());
    }
    return out;
}

ScenarioSeries make_scenario(std::string_view city, Date first, Date last, double dt_hours, std::uint64_t seed,
                             const TariffSpec& tariff)
{
    ScenarioSeries scenario;
    scenario.dt_hours = dt_hours;
    scenario.timestamps = make_timestamps(first, last, dt_hours);
    auto prices = economy7_prices(tariff, scenario.timestamps);
    auto weather = synth_weather_solar_load(city, scenario.timestamps, dt_hours, seed);
    scenario.pi_e = std::move(prices.pi_e);
    scenario.pi_s = std::move(prices.pi_s);
    scenario.t_ext = std::move(weather.t_ext);
    scenario.p_solar = std::move(weather.p_solar);
    scenario.p_other = std::move(weather.p_other);
    scenario.validate();
    return scenario;
}

ScenarioSeries read_scenario_csv(std::istream& in, std::optional<double> dt_hours)
{
    static constexpr std::array<const char*, 6> kColumns = {"timestamp", "pi_e", "pi_s", "p_solar", "p_other", "t_ext"};

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty scenario file", 1);
    const auto header = split(trim(line));
    std::array<std::size_t, 6> index{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        std::size_t found = header.size();
        for (std::size_t h = 0; h < header.size(); ++h)
            if (trim(header[h]) == kColumns[c])
                found = h;
        if (found == header.size())
            throw ParseError(std::string("missing column '") + kColumns[c] + "'", 1);
        index[c] = found;
    }

    ScenarioSeries s;
    std::vector<std::size_t> lines;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             line_no);
        const auto stamp = parse_iso_instant(trim(cells[index[0]]));
        if (!stamp)
            throw ParseError("invalid ISO-8601 timestamp '" + cells[index[0]] + "'", line_no);
        if (!s.timestamps.empty()) {
            if (*stamp == s.timestamps.back())
                throw ParseError("duplicated timestamp " + stamp->iso(), line_no);
            if (*stamp < s.timestamps.back())
                throw ParseError("timestamps are not sorted at " + stamp->iso(), line_no);
        }
        s.timestamps.push_back(*stamp);
        s.pi_e.push_back(parse_number(trim(cells[index[1]]), line_no, kColumns[1]));
        s.pi_s.push_back(parse_number(trim(cells[index[2]]), line_no, kColumns[2]));
        s.p_solar.push_back(parse_number(trim(cells[index[3]]), line_no, kColumns[3]));
        s.p_other.push_back(parse_number(trim(cells[index[4]]), line_no, kColumns[4]));
        s.t_ext.push_back(parse_number(trim(cells[index[5]]), line_no, kColumns[5]));
        if (s.pi_s.back() > s.pi_e.back())
            throw InvalidArgument("line " + std::to_string(line_no) + ": feed-in exceeds import price");
        lines.push_back(line_no);
    }
    if (s.timestamps.empty())
        throw ParseError("scenario file has no data rows", line_no);

    if (dt_hours) {
        s.dt_hours = *dt_hours;
    } else {
        if (s.timestamps.size() < 2)
            throw ParseError("cannot infer the step length from a single row", lines.front());
        s.dt_hours = static_cast<double>(s.timestamps[1].seconds - s.timestamps[0].seconds) / 3600.0;
    }
    const auto step = static_cast<std::int64_t>(std::llround(s.dt_hours * 3600.0));
    for (std::size_t k = 1; k < s.timestamps.size(); ++k)
        if (s.timestamps[k].seconds - s.timestamps[k - 1].seconds != step)
            throw ParseError("irregular step length before " + s.timestamps[k].iso(), lines[k]);
    s.validate();
    return s;
}

ScenarioSeries load_scenario_csv(const std::filesystem::path& path, std::optional<double> dt_hours)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open scenario file " + path.string());
    return read_scenario_csv(in, dt_hours);
}

void write_scenario_csv(std::ostream& out, const ScenarioSeries& s)
{
    out << "timestamp,pi_e,pi_s,p_solar,p_other,t_ext\n";
    for (std::size_t k = 0; k < s.size(); ++k)
        out << fmt::format("{},{},{},{},{},{}\n", s.timestamps[k].iso(), s.pi_e[k], s.pi_s[k], s.p_solar[k],
                           s.p_other[k], s.t_ext[k]);
}

} // namespace hems::synth
