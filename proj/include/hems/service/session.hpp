// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/agent/react.hpp"
#include "hems/config/config.hpp"
#include "hems/core/types.hpp"
#include "hems/llm/gateway.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hems::service {

enum class SessionState { awaiting_question, awaiting_answer, optimizing, done, failed };

std::string_view to_string(SessionState state);

struct SessionEvent {
    std::uint64_t seq = 0;
    /// question_asked, answer_received, parameter_stored, state_changed,
    /// schedule_ready or failed.
    std::string type;
    nlohmann::json data;
};

struct SessionOptions {
    agent::AgentConfig agent;
    int retry_budget = 3;
    config::HemsConfig hems;
    synth::TariffSpec tariff;
    std::uint64_t scenario_seed = 1;
};

/// Chart-ready series: price, powers with solar and occupancy, EV battery
/// and temperatures, all one entry per step.
nlohmann::json schedule_series(const Schedule& optimized, const Schedule& naive, const HemsParameters& params);

/// One conversation. Every public call is serialized; a call that finds
/// the session busy fails with StateError instead of waiting.
class Session {
public:
    using Clock = std::chrono::steady_clock;

    Session(std::string id, std::unique_ptr<llm::GenerationClient> client, SessionOptions options);

    /// Runs the agent up to its first question. ProviderError propagates.
    void start();
    /// Feeds the user's answer and runs until the next question, the end
    /// of retrieval (then optimizes) or a failure.
    void submit_answer(const std::string& text);

    nlohmann::json snapshot() const;
    /// Throws StateError until the session is done.
    nlohmann::json schedule() const;
    SessionState state() const;
    const std::string& id() const { return id_; }

    /// Events with seq > after. Waits up to `timeout` when there are none
    /// and the session is still live.
    std::vector<SessionEvent> events_after(std::uint64_t after, std::chrono::milliseconds timeout) const;
    bool finished() const;
    Clock::time_point last_active() const;

private:
    void run_until_pause();
    void optimize();
    void emit(std::string type, nlohmann::json data);
    void set_state(SessionState state);
    nlohmann::json snapshot_locked() const;

    std::string id_;
    std::unique_ptr<llm::GenerationClient> client_;
    SessionOptions options_;
    agent::RetrievalSession retrieval_;

    mutable std::mutex work_;  // held for the duration of a state change
    mutable std::mutex data_;  // guards everything below
    mutable std::condition_variable changed_;
    SessionState state_ = SessionState::awaiting_question;
    std::optional<std::string> question_;
    std::vector<nlohmann::json> transcript_;
    std::vector<SessionEvent> events_;
    std::optional<nlohmann::json> schedule_;
    std::string error_;
    Clock::time_point last_active_;
};

/// Owns sessions, evicts idle ones and optionally mirrors snapshots to disk.
class SessionManager {
public:
    using ClientFactory = std::function<std::unique_ptr<llm::GenerationClient>()>;

    SessionManager(ClientFactory factory, SessionOptions options, std::chrono::duration<double> ttl,
                   std::filesystem::path snapshot_dir = {});

    std::shared_ptr<Session> create();
    /// Throws NotFound.
    std::shared_ptr<Session> get(const std::string& id);
    std::size_t evict_idle();
    std::size_t size() const;
    /// Writes the session's snapshot when a snapshot directory is set.
    void persist(const Session& session) const;

private:
    ClientFactory factory_;
    SessionOptions options_;
    std::chrono::duration<double> ttl_;
    std::filesystem::path snapshot_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
};

} // namespace hems::service
