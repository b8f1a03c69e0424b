// SPDX-License-Identifier: Apache-2.0
#include "hems/user/persona.hpp"

#include "hems/agent/extract.hpp"
#include "hems/agent/prompts.hpp"
#include "hems/error.hpp"

#include <fmt/format.h>

#include <array>
#include <cctype>
#include <random>

namespace hems::user {

namespace {

constexpr std::array<Difficulty, 3> kDifficulties = {Difficulty::easy, Difficulty::medium, Difficulty::hard};

std::string lower(std::string_view text)
{
    std::string out(text);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> words(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        out.push_back(std::move(current));
    return out;
}

int twelve_hour(int hour)
{
    const int h = hour % 12;
    return h == 0 ? 12 : h;
}

std::string easy_date(Date d) { return d.canonical(); }

std::string medium_date(Date d) { return fmt::format("{:02}-{:02}-{:04}", d.day, d.month, d.year); }

std::string hour_minute(int hour) { return fmt::format("{:02}:00", hour); }

// Raw bits only, so draws do not depend on the standard library's
// distribution implementations.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : engine_(seed ^ 0x9e3779b97f4a7c15ULL) {}
    int between(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

} // namespace

std::string_view to_string(Difficulty d)
{
    switch (d) {
    case Difficulty::easy:
        return "easy";
    case Difficulty::medium:
        return "medium";
    case Difficulty::hard:
        return "hard";
    }
    return "unknown";
}

Difficulty parse_difficulty(std::string_view text)
{
    const std::string t = lower(text);
    if (t == "easy" || t == "e")
        return Difficulty::easy;
    if (t == "medium" || t == "m")
        return Difficulty::medium;
    if (t == "hard" || t == "h")
        return Difficulty::hard;
    throw InvalidArgument("unknown difficulty '" + std::string(text) + "' (expected easy, medium or hard)");
}

std::span<const Difficulty> all_difficulties() { return kDifficulties; }

void PersonaGroundTruth::validate() const
{
    if (city.empty())
        throw InvalidArgument("persona city must not be empty");
    if (ev_count < 0)
        throw InvalidArgument("persona ev_count must not be negative");
    if (!(t_min < t_max))
        throw InvalidArgument("persona requires t_min < t_max");
    if (arrival_hour < 12 || arrival_hour > 23)
        throw InvalidArgument("persona arrival_hour must be an afternoon or evening hour");
    if (leaving_hour < 1 || leaving_hour > 11)
        throw InvalidArgument("persona leaving_hour must be a morning hour");
    if (!date1.valid() || !date2.valid() || date2 < date1)
        throw InvalidArgument("persona requires valid dates with date1 <= date2");
}

agent::StoredValues PersonaGroundTruth::expected_values() const
{
    return {{"city", city},
            {"date_start", date1.canonical()},
            {"date_end", date2.canonical()},
            {"ev_count", std::to_string(ev_count)},
            {"ev_arrival_time", hour_minute(arrival_hour)},
            {"ev_departure_time", hour_minute(leaving_hour)},
            {"t_min", std::to_string(t_min)},
            {"t_max", std::to_string(t_max)}};
}

HemsParameters PersonaGroundTruth::parameters() const { return agent::assemble_parameters(expected_values()); }

nlohmann::json PersonaGroundTruth::to_json() const
{
    return {{"city", city},
            {"ev_count", ev_count},
            {"t_min", t_min},
            {"t_max", t_max},
            {"arrival_time", hour_minute(arrival_hour)},
            {"leaving_time", hour_minute(leaving_hour)},
            {"date1", date1.canonical()},
            {"date2", date2.canonical()}};
}

PersonaGroundTruth PersonaGroundTruth::from_json(const nlohmann::json& j)
{
    auto hour = [&](const char* key) {
        const auto t = parse_time_of_day(j.at(key).get<std::string>());
        if (!t || t->minute() != 0)
            throw InvalidArgument(std::string("persona ") + key + " must be a whole hour HH:00");
        return t->hour();
    };
    auto date = [&](const char* key) {
        const auto d = parse_canonical_date(j.at(key).get<std::string>());
        if (!d)
            throw InvalidArgument(std::string("persona ") + key + " must be YYYY/MM/DD");
        return *d;
    };
    PersonaGroundTruth t;
    try {
        t.city = j.at("city").get<std::string>();
        t.ev_count = j.at("ev_count").get<int>();
        t.t_min = j.at("t_min").get<int>();
        t.t_max = j.at("t_max").get<int>();
        t.arrival_hour = hour("arrival_time");
        t.leaving_hour = hour("leaving_time");
        t.date1 = date("date1");
        t.date2 = date("date2");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("invalid persona: ") + e.what());
    }
    t.validate();
    return t;
}

PersonaGroundTruth reference_persona()
{
    PersonaGroundTruth t;
    t.city = "London";
    t.ev_count = 2;
    t.t_min = 18;
    t.t_max = 20;
    t.arrival_hour = 19;
    t.leaving_hour = 9;
    t.date1 = {2024, 9, 16};
    t.date2 = {2024, 9, 22};
    return t;
}

PersonaGroundTruth randomize_truth(std::uint64_t seed)
{
    Draw draw(seed);
    const auto& cities = extract::uk_cities();
    PersonaGroundTruth t;
    t.city = cities[static_cast<std::size_t>(draw.between(0, static_cast<int>(cities.size()) - 1))];
    t.ev_count = draw.between(1, 3);
    t.t_min = draw.between(16, 19);
    t.t_max = t.t_min + draw.between(1, 4);
    t.arrival_hour = draw.between(16, 21);
    t.leaving_hour = draw.between(6, 9);
    const Date jan1{2024, 1, 1};
    const auto first = jan1.to_days() + draw.between(0, 358);
    t.date1 = Date::from_days(first);
    t.date2 = Date::from_days(first + draw.between(1, 6));
    return t;
}

std::string verbose_date(Date date)
{
    const int d = date.day;
    const char* suffix = "th";
    if (d % 100 < 11 || d % 100 > 13) {
        if (d % 10 == 1)
            suffix = "st";
        else if (d % 10 == 2)
            suffix = "nd";
        else if (d % 10 == 3)
            suffix = "rd";
    }
    return fmt::format("{}, {}{}, {}", month_name(date.month), d, suffix, date.year);
}

std::string render_user_prompt(Difficulty mode, const PersonaGroundTruth& truth)
{
    agent::Bindings b = {{"CITY", truth.city},
                         {"EV", std::to_string(truth.ev_count)},
                         {"TMIN", std::to_string(truth.t_min)},
                         {"TMAX", std::to_string(truth.t_max)}};
    std::string_view asset;
    switch (mode) {
    case Difficulty::easy:
        asset = agent::prompt_asset("user_easy.txt");
        b["ARRIVAL_TIME"] = hour_minute(truth.arrival_hour);
        b["LEAVING_TIME"] = hour_minute(truth.leaving_hour);
        b["DATE1"] = easy_date(truth.date1);
        b["DATE2"] = easy_date(truth.date2);
        break;
    case Difficulty::medium:
    case Difficulty::hard:
        asset = agent::prompt_asset(mode == Difficulty::medium ? "user_medium.txt" : "user_hard.txt");
        b["ARRIVAL_TIME"] = std::to_string(twelve_hour(truth.arrival_hour));
        b["LEAVING_TIME"] = std::to_string(twelve_hour(truth.leaving_hour));
        b["DATE1"] = mode == Difficulty::medium ? medium_date(truth.date1) : verbose_date(truth.date1);
        b["DATE2"] = mode == Difficulty::medium ? medium_date(truth.date2) : verbose_date(truth.date2);
        break;
    }
    return agent::render_template(
        asset, b, {"CITY", "EV", "TMIN", "TMAX", "ARRIVAL_TIME", "LEAVING_TIME", "DATE1", "DATE2"});
}

std::string render_user_chat(Difficulty mode, const PersonaGroundTruth& truth, std::string_view question)
{
    return agent::render_template(agent::prompt_asset("user_chat.txt"),
                                  {{"USER_PROMPT", render_user_prompt(mode, truth)}, {"QUERY", std::string(question)}},
                                  {"USER_PROMPT", "QUERY"});
}

std::string classify_question(std::string_view question)
{
    const auto w = words(question);
    auto has = [&](std::initializer_list<std::string_view> keys) {
        for (const auto& word : w)
            for (auto k : keys)
                if (word == k)
                    return true;
        return false;
    };
    const std::string q = lower(question);
    auto contains = [&](std::string_view phrase) { return q.find(phrase) != std::string::npos; };

    if (has({"minimum", "lowest", "min", "coldest"}))
        return "t_min";
    if (has({"maximum", "highest", "max", "warmest"}))
        return "t_max";
    if (has({"start", "begin", "starting", "beginning"}))
        return "date_start";
    if (has({"end", "finish", "ending", "stop"}))
        return "date_end";
    if (has({"vehicles", "vehicle", "cars", "car", "ev", "evs"}))
        return "ev_count";
    if (contains("come back") || contains("get back") || contains("home from") || has({"arrive", "return", "arrival"}))
        return "ev_arrival_time";
    if (has({"leave", "depart", "departure", "leaving"}) || contains("go to work"))
        return "ev_departure_time";
    if (has({"live", "city", "where", "town", "location"}))
        return "city";
    return {};
}

std::string scripted_answer(Difficulty mode, const PersonaGroundTruth& t, std::string_view id)
{
    const int arrival12 = twelve_hour(t.arrival_hour);
    const int leaving12 = twelve_hour(t.leaving_hour);
    const std::string vehicles = t.ev_count == 1 ? "electric vehicle" : "electric vehicles";
    switch (mode) {
    case Difficulty::easy:
        if (id == "city")
            return fmt::format("I live in {}.", t.city);
        if (id == "date_start")
            return fmt::format("I want the simulation to start on {}.", easy_date(t.date1));
        if (id == "date_end")
            return fmt::format("I want the simulation to end on {}.", easy_date(t.date2));
        if (id == "ev_count")
            return fmt::format("I own {} {}.", t.ev_count, vehicles);
        if (id == "ev_arrival_time")
            return fmt::format("I come back home at {}.", hour_minute(t.arrival_hour));
        if (id == "ev_departure_time")
            return fmt::format("I leave my house at {}.", hour_minute(t.leaving_hour));
        if (id == "t_min")
            return fmt::format("My minimum house comfort temperature is {} C.", t.t_min);
        if (id == "t_max")
            return fmt::format("My maximum house comfort temperature is {} C.", t.t_max);
        break;
    case Difficulty::medium:
        if (id == "city")
            return fmt::format("I live in {} in England, in a house.", t.city);
        if (id == "date_start")
            return fmt::format("I want the simulation to start on the {}.", medium_date(t.date1));
        if (id == "date_end")
            return fmt::format("I want the simulation to end on the {}.", medium_date(t.date2));
        if (id == "ev_count")
            return fmt::format("I own {} volvo XC40.", t.ev_count);
        if (id == "ev_arrival_time")
            return fmt::format("I come back from work at {} PM (UK time) after picking up my kids.", arrival12);
        if (id == "ev_departure_time")
            return fmt::format("I leave my house at {} AM (UK time) after a good breakfast.", leaving12);
        if (id == "t_min")
            return fmt::format("I like my house temperature to stay above {} °C.", t.t_min);
        if (id == "t_max")
            return fmt::format("I like my house temperature to stay below {} °C.", t.t_max);
        break;
    case Difficulty::hard:
        if (id == "city")
            return fmt::format("I live in {} in England on Banbury Road. It is a house I share with my family.",
                               t.city);
        if (id == "date_start")
            return fmt::format("I want to simulate my electric consumption starting {}. That is when my new "
                               "tariff begins.",
                               verbose_date(t.date1));
        if (id == "date_end")
            return fmt::format("The simulation should stop on {}. I will be away on holiday after that.",
                               verbose_date(t.date2));
        if (id == "ev_count")
            return fmt::format("I own {} volvo XC40 and one diesel pickup truck. I also ride a gas-powered "
                               "motorcycle on weekends.",
                               t.ev_count);
        if (id == "ev_arrival_time")
            return fmt::format("I am back from work at {} PM due to traffic. The roads are always busy in the "
                               "evening.",
                               arrival12);
        if (id == "ev_departure_time")
            return fmt::format("I go to work at {} AM to escape traffic. I like to reach the office early.",
                               leaving12);
        if (id == "t_min" || id == "t_max")
            return fmt::format("I like to set my house thermostat to be between {} and {} degrees Celsius. "
                               "Below {} degrees I feel cold.",
                               t.t_min, t.t_max, t.t_min);
        break;
    }
    return std::string(kNotUnderstood);
}

ScriptedUser::ScriptedUser(Difficulty mode, PersonaGroundTruth truth) : mode_(mode), truth_(std::move(truth))
{
    truth_.validate();
}

std::string ScriptedUser::answer(const std::string& question)
{
    const std::string id = classify_question(question);
    if (id.empty())
        return std::string(kNotUnderstood);
    return scripted_answer(mode_, truth_, id);
}

LlmUser::LlmUser(llm::GenerationClient& client, Difficulty mode, PersonaGroundTruth truth, int max_tokens,
                 nlohmann::json options)
    : client_(client), mode_(mode), truth_(std::move(truth)), max_tokens_(max_tokens), options_(std::move(options))
{
    truth_.validate();
}

std::string LlmUser::answer(const std::string& question)
{
    llm::GenerationRequest request{render_user_chat(mode_, truth_, question), {"<|im_end|>"}, max_tokens_, options_};
    std::string reply = client_.generate(request);
    const auto first = reply.find_first_not_of(" \t\r\n");
    const auto last = reply.find_last_not_of(" \t\r\n");
    return first == std::string::npos ? std::string() : reply.substr(first, last - first + 1);
}

} // namespace hems::user
