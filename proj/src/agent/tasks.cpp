// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/tasks.hpp"

#include "hems/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

namespace hems::agent {

namespace {

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

StoreOutcome reject(const nlohmann::json& raw, std::string_view expectation)
{
    return {false, {}, "The value " + raw.dump() + " is not valid: " + std::string(expectation) + " Try again."};
}

StoreOutcome accept(std::string canonical) { return {true, std::move(canonical), std::string(kStoreSuccess)}; }

std::optional<double> to_number(const nlohmann::json& raw)
{
    if (raw.is_number())
        return raw.get<double>();
    if (!raw.is_string())
        return std::nullopt;
    const std::string text = trim(raw.get<std::string>());
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
        return std::nullopt;
    return value;
}

double parse_double(const std::string& text)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("'" + text + "' is not a number");
    return value;
}

} // namespace

std::string_view to_string(ValueFormat format)
{
    switch (format) {
    case ValueFormat::datetime: return "datetime";
    case ValueFormat::integer: return "int";
    case ValueFormat::string: return "string";
    case ValueFormat::time: return "time";
    case ValueFormat::floating: return "float";
    }
    return "unknown";
}

const std::vector<ParameterTask>& default_tasks()
{
    static const std::vector<ParameterTask> tasks = {
        {"city", "Find the user's city in the United Kingdom and store it (city must be a string).", ValueFormat::string,
         "text"},
        {"date_start",
         "Find the date when the user wants the simulation to start and store it (date must be a string in the "
         "format YYYY/MM/DD).",
         ValueFormat::datetime, "YYYY/MM/DD"},
        {"date_end",
         "Find the date when the user wants the simulation to end and store it (date must be a string in the format "
         "YYYY/MM/DD).",
         ValueFormat::datetime, "YYYY/MM/DD"},
        {"ev_count", "Find the user's number of electric vehicles and store it (number must be an integer).",
         ValueFormat::integer, "integer"},
        {"ev_arrival_time",
         "Find the time when the user comes back home from work and store it (time must be a string in the format "
         "HH:MM).",
         ValueFormat::time, "HH:MM"},
        {"ev_departure_time",
         "Find the time when the user leaves the house and store it (time must be a string in the format HH:MM).",
         ValueFormat::time, "HH:MM"},
        {"t_min", "Find the user's minimum house comfort temperature and store it (temperature must be a float).",
         ValueFormat::floating, "decimal °C"},
        {"t_max", "Find the user's maximum house comfort temperature and store it (temperature must be a float).",
         ValueFormat::floating, "decimal °C"},
    };
    return tasks;
}

const ParameterTask& find_task(std::string_view parameter_id)
{
    for (const auto& task : default_tasks())
        if (task.parameter_id == parameter_id)
            return task;
    throw NotFound("unknown parameter '" + std::string(parameter_id) + "'");
}

StoreOutcome store_validate(const ParameterTask& task, const nlohmann::json& raw)
{
    switch (task.format) {
    case ValueFormat::datetime: {
        if (!raw.is_string())
            return reject(raw, "the date must be a string in the format YYYY/MM/DD.");
        const auto date = parse_canonical_date(trim(raw.get<std::string>()));
        if (!date)
            return reject(raw, "the date must be a string in the format YYYY/MM/DD.");
        return accept(date->canonical());
    }
    case ValueFormat::time: {
        if (!raw.is_string())
            return reject(raw, "the time must be a string in the format HH:MM.");
        const auto time = parse_time_of_day(trim(raw.get<std::string>()));
        if (!time)
            return reject(raw, "the time must be a string in the format HH:MM.");
        return accept(time->canonical());
    }
    case ValueFormat::integer: {
        const auto number = to_number(raw);
        if (!number || !std::isfinite(*number) || std::floor(*number) != *number || *number < 0 || *number > 1e6)
            return reject(raw, "the value must be a nonnegative integer.");
        if (raw.is_string() && trim(raw.get<std::string>()).find_first_not_of("0123456789") != std::string::npos)
            return reject(raw, "the value must be a nonnegative integer.");
        return accept(fmt::format("{}", static_cast<long long>(*number)));
    }
    case ValueFormat::floating: {
        const auto number = to_number(raw);
        if (!number || !std::isfinite(*number))
            return reject(raw, "the value must be a float.");
        return accept(fmt::format("{}", *number));
    }
    case ValueFormat::string: {
        if (!raw.is_string() || trim(raw.get<std::string>()).empty())
            return reject(raw, "the value must be a non-empty string.");
        return accept(trim(raw.get<std::string>()));
    }
    }
    return reject(raw, "unsupported format.");
}

HemsParameters assemble_parameters(const StoredValues& values)
{
    std::string missing;
    for (const auto& task : default_tasks())
        if (!values.contains(task.parameter_id))
            missing += (missing.empty() ? "" : ", ") + task.parameter_id;
    if (!missing.empty())
        throw InvalidArgument("missing parameters: " + missing);

    auto date = [&](const char* id) {
        const auto d = parse_canonical_date(values.at(id));
        if (!d)
            throw InvalidArgument(std::string(id) + " is not a YYYY/MM/DD date");
        return *d;
    };
    auto time = [&](const char* id) {
        const auto t = parse_time_of_day(values.at(id));
        if (!t)
            throw InvalidArgument(std::string(id) + " is not an HH:MM time");
        return *t;
    };

    HemsParameters p;
    p.city = values.at("city");
    p.date_start = date("date_start");
    p.date_end = date("date_end");
    p.ev_count = static_cast<int>(parse_double(values.at("ev_count")));
    p.ev_arrival_time = time("ev_arrival_time");
    p.ev_departure_time = time("ev_departure_time");
    p.t_min = parse_double(values.at("t_min"));
    p.t_max = parse_double(values.at("t_max"));
    p.validate();
    return p;
}

StoredValues canonical_values(const HemsParameters& p)
{
    return {
        {"city", p.city},
        {"date_start", p.date_start.canonical()},
        {"date_end", p.date_end.canonical()},
        {"ev_count", std::to_string(p.ev_count)},
        {"ev_arrival_time", p.ev_arrival_time.canonical()},
        {"ev_departure_time", p.ev_departure_time.canonical()},
        {"t_min", fmt::format("{}", p.t_min)},
        {"t_max", fmt::format("{}", p.t_max)},
    };
}

} // namespace hems::agent
