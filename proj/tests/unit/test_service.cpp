// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/rule_agent.hpp"
#include "hems/error.hpp"
#include "hems/service/server.hpp"

#include "dialogue.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

using namespace hems;
using namespace hems::service;

namespace {

SessionOptions fast_options()
{
    SessionOptions o;
    o.hems.dt_hours = 1.0;
    return o;
}

SessionManager::ClientFactory rule_agent()
{
    return [] { return std::make_unique<agent::RuleBasedAgentModel>(); };
}

class RunningServer {
public:
    explicit RunningServer(SessionManager& sessions) : server_(sessions, config())
    {
        port_ = server_.bind();
        thread_ = std::thread([this] { server_.listen(); });
        httplib::Client probe(url());
        for (int i = 0; i < 100 && !probe.Get("/health"); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ~RunningServer()
    {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    static config::ServiceConfig config()
    {
        config::ServiceConfig c;
        c.port = 0;
        return c;
    }
    Server server_;
    int port_ = 0;
    std::thread thread_;
};

nlohmann::json body(const httplib::Result& r)
{
    REQUIRE(r);
    return nlohmann::json::parse(r->body);
}

} // namespace

TEST_CASE("session state machine over the household dialogue")
{
    SessionManager sessions(rule_agent(), fast_options(), std::chrono::hours(1));
    auto session = sessions.create();
    auto snap = session->snapshot();
    CHECK(snap["state"] == "awaiting_answer");
    CHECK(snap["question"] == "Where do you live ?");
    CHECK(snap["parameters"][0]["status"] == "active");
    CHECK_THROWS_AS(session->schedule(), StateError);

    int answers = 0;
    while (session->state() == SessionState::awaiting_answer) {
        session->submit_answer(testing::london_reply(session->snapshot()["question"].get<std::string>()));
        ++answers;
    }
    CHECK(answers == 8);
    REQUIRE(session->state() == SessionState::done);
    snap = session->snapshot();
    for (const auto& p : snap["parameters"]) {
        CHECK(p["status"] == "stored");
        CHECK(p["value"] == testing::london_values().at(p["parameter_id"].get<std::string>()));
    }
    CHECK(snap["transcript"].size() == 16);
    const auto schedule = session->schedule();
    const std::size_t n = schedule["timestamps"].size();
    CHECK(n == 7 * 24);
    CHECK(schedule["price"]["pi_e"].size() == n);
    CHECK(schedule["power"]["p_heat"].size() == n);
    CHECK(schedule["ev_battery"]["e_ev"].size() == n);
    CHECK(schedule["temperature"]["t_house"].size() == n);
    CHECK(schedule["summary"]["total_cost"].get<double>() < schedule["summary"]["naive_cost"].get<double>());
    CHECK_THROWS_AS(session->submit_answer("more"), StateError);

    const auto events = session->events_after(0, std::chrono::milliseconds(0));
    int stored = 0, asked = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(events[i].seq == i + 1);
        stored += events[i].type == "parameter_stored";
        asked += events[i].type == "question_asked";
    }
    CHECK(stored == 8);
    CHECK(asked == 8);
    CHECK(events.back().type == "schedule_ready");
}

TEST_CASE("contradictory comfort band fails the session")
{
    SessionManager sessions(rule_agent(), fast_options(), std::chrono::hours(1));
    auto session = sessions.create();
    while (session->state() == SessionState::awaiting_answer) {
        const auto question = session->snapshot()["question"].get<std::string>();
        const auto id = user::classify_question(question);
        session->submit_answer(id == "t_max" ? "At most 16 degrees." : testing::london_reply(question));
    }
    CHECK(session->state() == SessionState::failed);
    const auto error = session->snapshot()["error"].get<std::string>();
    CHECK(error.find("t_min") != std::string::npos);
}

TEST_CASE("sessions are isolated, evicted and persisted")
{
    const auto dir = std::filesystem::temp_directory_path() / "hems_service_snapshots";
    std::filesystem::remove_all(dir);
    SessionManager sessions(rule_agent(), fast_options(), std::chrono::milliseconds(50), dir);
    auto a = sessions.create();
    auto b = sessions.create();
    CHECK(a->id() != b->id());
    a->submit_answer("I live in Leeds.");
    CHECK(a->snapshot()["transcript"].size() == 3);
    CHECK(b->snapshot()["transcript"].size() == 1);
    CHECK(std::filesystem::exists(dir / (a->id() + ".json")));
    CHECK_THROWS_AS(sessions.get("nope"), NotFound);
    std::this_thread::sleep_for(std::chrono::milliseconds(80));
    CHECK(sessions.evict_idle() == 2);
    CHECK(sessions.size() == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("concurrent answers to one session are serialized")
{
    std::atomic<bool> release = false;
    std::atomic<bool> blocking = false;
    agent::RuleBasedAgentModel model;
    SessionManager sessions(
        [&] {
            return std::make_unique<llm::CallbackProvider>([&](const llm::GenerationRequest& r) {
                if (r.prompt.find("Observation: I live in Leeds.") != std::string::npos) {
                    blocking = true;
                    while (!release)
                        std::this_thread::sleep_for(std::chrono::milliseconds(1));
                }
                return model.generate(r);
            });
        },
        fast_options(), std::chrono::hours(1));
    auto session = sessions.create();
    std::thread first([&] { session->submit_answer("I live in Leeds."); });
    while (!blocking)
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    CHECK_THROWS_AS(session->submit_answer("I live in York."), StateError);
    release = true;
    first.join();
    const auto transcript = session->snapshot()["transcript"];
    REQUIRE(transcript.size() == 3);
    CHECK(transcript[1]["text"] == "I live in Leeds.");
}

TEST_CASE("provider outage at creation is reported")
{
    SessionManager sessions(
        [] {
            return std::make_unique<llm::CallbackProvider>(
                [](const llm::GenerationRequest&) -> std::string { throw ProviderError("down", 3); });
        },
        fast_options(), std::chrono::hours(1));
    CHECK_THROWS_AS(sessions.create(), ProviderError);
    CHECK(sessions.size() == 0);
}

TEST_CASE("HTTP endpoints")
{
    SessionManager sessions(rule_agent(), fast_options(), std::chrono::hours(1));
    RunningServer running(sessions);
    httplib::Client client(running.url());

    auto created = client.Post("/sessions", "{}", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    auto snap = body(created);
    const std::string id = snap["session_id"];
    CHECK(snap["question"] == "Where do you live ?");

    auto missing = client.Get("/sessions/unknown");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(body(missing)["error"]["code"] == "not_found");

    auto early = client.Get("/sessions/" + id + "/schedule");
    REQUIRE(early);
    CHECK(early->status == 409);
    CHECK(body(early)["error"]["code"] == "wrong_state");

    auto bad = client.Post("/sessions/" + id + "/answers", "{\"reply\": 1}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    auto garbled = client.Post("/sessions/" + id + "/answers", "not json", "application/json");
    REQUIRE(garbled);
    CHECK(garbled->status == 400);

    while (snap["state"] == "awaiting_answer") {
        const nlohmann::json answer = {{"answer", testing::london_reply(snap["question"].get<std::string>())}};
        auto r = client.Post("/sessions/" + id + "/answers", answer.dump(), "application/json");
        REQUIRE(r);
        CHECK(r->status == 200);
        snap = body(r);
    }
    CHECK(snap["state"] == "done");

    auto late = client.Post("/sessions/" + id + "/answers", "{\"answer\": \"x\"}", "application/json");
    REQUIRE(late);
    CHECK(late->status == 409);

    auto schedule = client.Get("/sessions/" + id + "/schedule");
    REQUIRE(schedule);
    CHECK(schedule->status == 200);
    const auto series = body(schedule);
    CHECK(series["power"]["p_ev"].size() == series["timestamps"].size());

    auto events = client.Get("/sessions/" + id + "/events");
    REQUIRE(events);
    CHECK(events->get_header_value("Content-Type").find("text/event-stream") == 0);
    CHECK(events->body.find("event: question_asked") != std::string::npos);
    CHECK(events->body.find("event: schedule_ready") != std::string::npos);

    auto tail = client.Get("/sessions/" + id + "/events?after=" + std::to_string(snap["last_event"].get<int>() - 1));
    REQUIRE(tail);
    CHECK(tail->body.find("event: question_asked") == std::string::npos);
    CHECK(tail->body.find("event: schedule_ready") != std::string::npos);

    auto junk = client.Get("/sessions/" + id + "/events?after=soon");
    REQUIRE(junk);
    CHECK(junk->status == 400);
    CHECK(body(junk)["error"]["code"] == "invalid_argument");
}
