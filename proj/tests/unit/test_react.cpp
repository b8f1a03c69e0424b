// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/react.hpp"
#include "hems/agent/rule_agent.hpp"
#include "hems/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace hems;
using namespace hems::agent;

namespace {

std::string blob(const std::string& action, const nlohmann::json& input)
{
    return "Action:\n```\n" + nlohmann::json{{"action", action}, {"action_input", input}}.dump() + "\n```\n";
}

// Answers in the style of a household owner who knows the values exactly.
std::string household_answer(const std::string& question)
{
    if (question.find("live") != std::string::npos)
        return "I live in London.";
    if (question.find("start") != std::string::npos)
        return "I want the simulation to start on 2024/09/16.";
    if (question.find("end") != std::string::npos)
        return "I want it to end on 2024/09/22.";
    if (question.find("electric") != std::string::npos)
        return "I own 2 electric vehicles.";
    if (question.find("come back") != std::string::npos)
        return "I come back home at 19:00.";
    if (question.find("leave") != std::string::npos)
        return "I leave my house at 09:00.";
    if (question.find("minimum") != std::string::npos)
        return "My minimum comfort temperature is 18 C.";
    if (question.find("maximum") != std::string::npos)
        return "My maximum comfort temperature is 20 C.";
    return "I don't understand the question.";
}

} // namespace

TEST_CASE("episode asks, stores and stops")
{
    llm::ScriptedProvider provider;
    const auto& task = find_task("ev_count");
    provider.add(task.task_text, {blob("ask_user", "How many electric vehicles do you own ?") + "Observation: made up",
                                  blob("store", 2)});
    AgentConfig config;
    TaskEpisode episode(provider, task, config);
    auto q = episode.advance();
    REQUIRE(q);
    CHECK(*q == "How many electric vehicles do you own ?");
    CHECK_THROWS_AS(TaskEpisode(provider, task, AgentConfig{}).answer("x"), StateError);
    episode.answer("I own 2 electric vehicles.");
    CHECK_FALSE(episode.advance());
    REQUIRE(episode.done());
    const auto& trace = episode.trace();
    CHECK(trace.outcome == TaskOutcome::success);
    CHECK(trace.stored_value == "2");
    CHECK(trace.generations == 2);
    CHECK(trace.questions_asked == 1);
    CHECK(episode.prompt().find("made up") == std::string::npos);
    CHECK(episode.prompt().find("Observation: I own 2 electric vehicles.\n") != std::string::npos);
    CHECK(episode.prompt().ends_with("Observation: " + std::string(kStoreSuccess) + "\n"));
    CHECK(provider.remaining(task.task_text) == 0);
}

TEST_CASE("garbage generations run into the generation limit")
{
    int calls = 0;
    llm::CallbackProvider garbage([&](const llm::GenerationRequest&) {
        ++calls;
        return std::string("I am not sure what to do.");
    });
    AgentConfig config;
    config.max_generations = 5;
    auto trace = run_task(garbage, find_task("city"), config, household_answer);
    CHECK(trace.outcome == TaskOutcome::max_iterations);
    CHECK(trace.generations == 5);
    CHECK(calls == 5);
    CHECK(trace.parse_errors == 5);
    CHECK_FALSE(trace.stored_value);

    config.max_consecutive_parse_errors = 2;
    trace = run_task(garbage, find_task("city"), config, household_answer);
    CHECK(trace.outcome == TaskOutcome::parse_failure_exhausted);
    CHECK(trace.generations == 2);
}

TEST_CASE("a malformed blob is reported back and then corrected")
{
    llm::ScriptedProvider provider;
    const auto& task = find_task("t_min");
    provider.add(task.task_text, {"Action:\n```\n{\"action\": \"store\", \"action_input\": }\n```", blob("store", 18)});
    const auto trace = run_task(provider, task, AgentConfig{}, household_answer);
    CHECK(trace.outcome == TaskOutcome::success);
    CHECK(trace.parse_errors == 1);
    REQUIRE(trace.transcript.size() == 4);
    CHECK(trace.transcript[1].text.find("You made a mistake in your JSON blob.") == 0);
}

TEST_CASE("invalid store inputs are corrected within the episode")
{
    llm::ScriptedProvider provider;
    const auto& task = find_task("date_start");
    provider.add(task.task_text, {blob("store", "16/09/2024"), blob("store", "2024/09/16")});
    const auto trace = run_task(provider, task, AgentConfig{}, household_answer);
    CHECK(trace.outcome == TaskOutcome::success);
    CHECK(trace.stored_value == "2024/09/16");
    CHECK(trace.transcript[1].text.find("is not valid") != std::string::npos);
}

TEST_CASE("rule-based agent recovers the household dialogue")
{
    for (auto type : all_agent_types()) {
        CAPTURE(to_string(type));
        RuleBasedAgentModel model;
        RetrievalOptions options;
        options.agent.type = type;
        std::vector<std::string> questions;
        const auto result = run_retrieval(model, options, [&](const std::string& q) {
            questions.push_back(q);
            return household_answer(q);
        });
        CHECK(result.unrecovered.empty());
        CHECK(result.traces.size() == 8);
        CHECK(questions == std::vector<std::string>{
                               "Where do you live ?", "When do you want the simulation to start ?",
                               "When do you want the simulation to end ?", "How many electric vehicles do you own ?",
                               "When do you come back from work ?", "When do you leave your house ?",
                               "What is your house minimum comfort temperature ?",
                               "What is your house maximum comfort temperature ?"});
        const StoredValues expected = {{"city", "London"},     {"date_start", "2024/09/16"},
                                       {"date_end", "2024/09/22"}, {"ev_count", "2"},
                                       {"ev_arrival_time", "19:00"}, {"ev_departure_time", "09:00"},
                                       {"t_min", "18"},         {"t_max", "20"}};
        CHECK(result.values == expected);
        for (const auto& t : result.traces) {
            CHECK(t.generations == 2);
            CHECK(t.attempt == 1);
            const bool has_thought = t.transcript.front().text.find("Thought:") != std::string::npos;
            CHECK(has_thought == uses_thoughts(type));
        }
    }
}

TEST_CASE("rule-based agent rephrases when the reply has no value")
{
    RuleBasedAgentModel model;
    int asked = 0;
    const auto trace = run_task(model, find_task("ev_count"), AgentConfig{}, [&](const std::string&) {
        return ++asked == 1 ? std::string("I don't understand the question.") : std::string("I own one car.");
    });
    CHECK(trace.outcome == TaskOutcome::success);
    CHECK(trace.stored_value == "1");
    REQUIRE(trace.dialogue.size() == 2);
    CHECK(trace.dialogue[0].first != trace.dialogue[1].first);
}

TEST_CASE("session re-instantiates the agent after a failed attempt")
{
    RuleBasedAgentModel model;
    int city_calls = 0;
    llm::CallbackProvider flaky([&](const llm::GenerationRequest& r) {
        if (llm::ScriptedProvider::task_fingerprint(r) == find_task("city").task_text && city_calls++ == 0)
            throw ProviderError("connection refused");
        return model.generate(r);
    });
    RetrievalOptions options;
    RetrievalSession session(flaky, options);
    std::vector<std::string> seen;
    session.on_trace([&](const RetrievalTrace& t) { seen.push_back(t.parameter_id); });
    while (auto q = session.advance())
        session.answer(household_answer(*q));
    CHECK(session.done());
    REQUIRE(session.traces().size() == 9);
    CHECK(session.traces()[0].outcome == TaskOutcome::provider_error);
    CHECK(session.traces()[1].attempt == 2);
    CHECK(seen.size() == 9);
    CHECK(session.parameters().city == "London");

    std::ostringstream out;
    write_traces_jsonl(out, session.traces());
    std::istringstream in(out.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("transcript"));
        ++lines;
    }
    CHECK(lines == 9);
}

TEST_CASE("exhausted retry budget names the parameter")
{
    RuleBasedAgentModel model;
    llm::CallbackProvider broken([&](const llm::GenerationRequest& r) {
        if (llm::ScriptedProvider::task_fingerprint(r) == find_task("ev_count").task_text)
            return std::string("no idea");
        return model.generate(r);
    });
    RetrievalOptions options;
    options.retry_budget = 0;
    options.agent.max_generations = 3;
    RetrievalSession session(broken, options);
    while (auto q = session.advance())
        session.answer(household_answer(*q));
    CHECK(session.unrecovered() == std::vector<std::string>{"ev_count"});
    CHECK(session.traces().size() == 8);
    try {
        (void)session.parameters();
        FAIL("expected budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::budget_exhausted);
        CHECK(std::string(e.what()).find("ev_count") != std::string::npos);
    }

    options.retry_budget = 3;
    const auto result = run_retrieval(broken, options, household_answer);
    CHECK(result.traces.size() == 11);
}

TEST_CASE("provider errors can abort the session")
{
    llm::CallbackProvider down([](const llm::GenerationRequest&) -> std::string { throw ProviderError("down", 3); });
    RetrievalOptions options;
    options.abort_on_provider_error = true;
    RetrievalSession session(down, options);
    CHECK_THROWS_AS(session.advance(), ProviderError);
    CHECK(session.traces().size() == 1);
}

TEST_CASE("stop sequences are applied by the gateway")
{
    llm::CallbackProvider chatty([](const llm::GenerationRequest&) { return std::string("abc Observation: xyz"); });
    CHECK(chatty.generate({"p", {"Observation:"}}) == "abc ");
    CHECK(chatty.generate({"p", {}}) == "abc Observation: xyz");
    CHECK_THROWS_AS(chatty.generate({"", {}}), InvalidArgument);
    llm::ScriptedProvider empty;
    CHECK_THROWS_AS(empty.generate({"p", {}}), ProviderError);
}
