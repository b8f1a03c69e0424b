// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/rule_agent.hpp"

#include "hems/agent/extract.hpp"
#include "hems/agent/parser.hpp"
#include "hems/agent/tasks.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hems::agent {

namespace {

struct Phrasing {
    std::string_view id;
    std::string_view keyword;
    std::array<std::string_view, 2> questions;
    std::string_view subject;
};

constexpr std::array<Phrasing, 8> kPhrasings = {{
    {"city", "city", {"Where do you live ?", "Which city in the United Kingdom do you live in?"}, "city"},
    {"date_start", "start", {"When do you want the simulation to start ?", "On which date should the simulation start?"},
     "simulation start date"},
    {"date_end", "end", {"When do you want the simulation to end ?", "On which date should the simulation end?"},
     "simulation end date"},
    {"ev_count", "electric vehicles", {"How many electric vehicles do you own ?", "How many electric cars do you have?"},
     "number of electric vehicles"},
    {"ev_arrival_time", "comes back", {"When do you come back from work ?", "At what time do you get back home?"},
     "arrival time"},
    {"ev_departure_time", "leaves", {"When do you leave your house ?", "At what time do you leave home in the morning?"},
     "departure time"},
    {"t_min", "minimum", {"What is your house minimum comfort temperature ?",
                          "What is the lowest temperature you accept in your house?"},
     "minimum comfort temperature"},
    {"t_max", "maximum", {"What is your house maximum comfort temperature ?",
                          "What is the highest temperature you accept in your house?"},
     "maximum comfort temperature"},
}};

const Phrasing* phrasing(std::string_view id)
{
    for (const auto& p : kPhrasings)
        if (p.id == id)
            return &p;
    return nullptr;
}

std::string action_blob(std::string_view action, const nlohmann::json& input)
{
    nlohmann::ordered_json blob;
    blob["action"] = action;
    blob["action_input"] = input;
    return "Action:\n```\n" + blob.dump(2) + "\n```\n";
}

std::string render_value(const nlohmann::json& value)
{
    return value.is_string() ? value.get<std::string>() : value.dump();
}

} // namespace

std::optional<std::string> RuleBasedAgentModel::detect_parameter(std::string_view task_text)
{
    for (const auto& task : default_tasks())
        if (task.task_text == task_text)
            return task.parameter_id;
    for (const auto& p : kPhrasings)
        if (task_text.find(p.keyword) != std::string_view::npos)
            return std::string(p.id);
    return std::nullopt;
}

std::string RuleBasedAgentModel::question_for(std::string_view parameter_id, int attempt)
{
    const auto* p = phrasing(parameter_id);
    if (!p)
        return "Could you tell me more about your household?";
    return std::string(p->questions[static_cast<std::size_t>(attempt) % p->questions.size()]);
}

std::optional<nlohmann::json> RuleBasedAgentModel::extract_value(std::string_view parameter_id, std::string_view reply)
{
    if (parameter_id == "city") {
        if (auto city = extract::find_city(reply))
            return nlohmann::json(*city);
    } else if (parameter_id == "date_start" || parameter_id == "date_end") {
        if (auto date = extract::find_date(reply))
            return nlohmann::json(date->canonical());
    } else if (parameter_id == "ev_count") {
        if (auto n = extract::find_integer(reply))
            return nlohmann::json(*n);
    } else if (parameter_id == "ev_arrival_time" || parameter_id == "ev_departure_time") {
        if (auto t = extract::find_time(reply))
            return nlohmann::json(t->canonical());
    } else if (parameter_id == "t_min" || parameter_id == "t_max") {
        const auto numbers = extract::find_numbers(reply);
        if (!numbers.empty()) {
            const double v = parameter_id == "t_min" ? *std::min_element(numbers.begin(), numbers.end())
                                                     : *std::max_element(numbers.begin(), numbers.end());
            if (v == std::floor(v))
                return nlohmann::json(static_cast<long long>(v));
            return nlohmann::json(v);
        }
    }
    return std::nullopt;
}

std::string RuleBasedAgentModel::do_generate(const llm::GenerationRequest& request)
{
    const std::string& prompt = request.prompt;
    const bool thoughts = prompt.find("Thought: You should always think") != std::string::npos;
    const std::string task_text = llm::ScriptedProvider::task_fingerprint(request);
    const std::string id = detect_parameter(task_text).value_or("");
    const auto* p = phrasing(id);
    const std::string subject = p ? std::string(p->subject) : "value";

    static constexpr std::string_view kTurn = "<|im_start|>assistant\n";
    const auto turn = prompt.rfind(kTurn);
    const std::string_view episode =
        turn == std::string::npos ? std::string_view() : std::string_view(prompt).substr(turn + kTurn.size());
    const auto steps = parse_transcript(episode);

    int asked = 0;
    for (const auto& s : steps)
        if (const auto* call = s.step.tool_call(); call && call->action == "ask_user")
            ++asked;

    auto thought = [&](const std::string& text) { return thoughts ? "Thought: " + text + "\n" : std::string(); };
    auto ask = [&] {
        return thought("I need to ask the user for the " + subject + ".") +
               action_blob("ask_user", question_for(id, asked)) + "Observation:";
    };

    if (steps.empty() || !steps.back().observation)
        return ask();
    const auto& last = steps.back();
    const auto* call = last.step.tool_call();
    if (!call)
        return ask();
    if (call->action == "ask_user") {
        if (auto value = extract_value(id, *last.observation))
            return thought("I need to store this parameter.") + action_blob("store", *value) + "Observation:";
        return ask();
    }
    if (last.observation->rfind(kStoreSuccess, 0) == 0)
        return thought("I now know the final answer.") + "Final Answer: The user's " + subject + " is " +
               render_value(call->action_input) + ".";
    return ask();
}

} // namespace hems::agent
