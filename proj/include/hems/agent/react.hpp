// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/agent/parser.hpp"
#include "hems/agent/prompts.hpp"
#include "hems/agent/tasks.hpp"
#include "hems/llm/gateway.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hems::agent {

struct AgentConfig {
    AgentType type = AgentType::react_with_example;
    /// Generations allowed for one agent instance.
    int max_generations = 8;
    /// Consecutive unparseable generations tolerated; 0 means no limit.
    int max_consecutive_parse_errors = 0;
    int max_tokens = 512;
    std::vector<std::string> stop = {"Observation:"};
    nlohmann::json generation_options = nlohmann::json::object();
    std::vector<ToolSpec> tools = default_tools();

    std::vector<std::string> tool_names() const;
};

enum class TaskOutcome { success, max_iterations, parse_failure_exhausted, provider_error };

std::string_view to_string(TaskOutcome outcome);

struct TranscriptSegment {
    enum class Kind { generation, observation };
    Kind kind;
    std::string text;
};

/// Everything one agent instance did for one parameter.
struct RetrievalTrace {
    std::string parameter_id;
    std::string task_text;
    int attempt = 1;
    std::vector<TranscriptSegment> transcript;
    int generations = 0;
    int questions_asked = 0;
    int parse_errors = 0;
    bool lenient_parse = false;
    bool healed_parse = false;
    std::optional<std::string> stored_value;
    TaskOutcome outcome = TaskOutcome::max_iterations;
    std::string error;
    double wall_time_s = 0.0;
    /// (question, answer) pairs in order.
    std::vector<std::pair<std::string, std::string>> dialogue;

    nlohmann::json to_json() const;
};

/// One agent instance working on one task. Resumable: advance() runs
/// generations until the agent asks the user something or stops.
class TaskEpisode {
public:
    TaskEpisode(llm::GenerationClient& client, ParameterTask task, AgentConfig config, int attempt = 1);

    /// Returns the pending question, or nullopt once the episode is done.
    /// Provider failures end the episode with outcome provider_error.
    std::optional<std::string> advance();
    /// Supplies the answer to the pending question. Throws StateError when
    /// no question is pending.
    void answer(const std::string& text);

    bool done() const { return done_; }
    const std::optional<std::string>& pending_question() const { return pending_; }
    const RetrievalTrace& trace() const { return trace_; }
    const std::string& prompt() const { return prompt_; }
    const ParameterTask& task() const { return task_; }

private:
    void observe(const std::string& response, const std::string& observation);
    void finish(TaskOutcome outcome);

    llm::GenerationClient& client_;
    ParameterTask task_;
    AgentConfig config_;
    std::vector<std::string> tool_names_;
    std::string prompt_;
    std::string last_response_;
    std::optional<std::string> pending_;
    int consecutive_parse_errors_ = 0;
    bool done_ = false;
    bool started_ = false;
    std::chrono::steady_clock::time_point start_;
    RetrievalTrace trace_;
};

using AskUser = std::function<std::string(const std::string&)>;

/// Runs one episode to completion, answering questions with `ask`.
RetrievalTrace run_task(llm::GenerationClient& client, const ParameterTask& task, const AgentConfig& config,
                        const AskUser& ask, int attempt = 1);

struct RetrievalOptions {
    AgentConfig agent;
    /// Fresh agent instances allowed per parameter after the first one fails.
    int retry_budget = 3;
    /// Rethrow ProviderError instead of recording it and moving on.
    bool abort_on_provider_error = false;
    std::vector<ParameterTask> tasks = default_tasks();
};

/// Walks every task in order, re-instantiating the agent when a value is
/// not stored, until all values are present or the retry budget runs out.
class RetrievalSession {
public:
    RetrievalSession(llm::GenerationClient& client, RetrievalOptions options = {});

    std::optional<std::string> advance();
    void answer(const std::string& text);

    bool done() const { return done_; }
    const std::optional<std::string>& pending_question() const;
    /// Task currently being worked on; empty when done.
    std::string current_parameter() const;

    const std::vector<RetrievalTrace>& traces() const { return traces_; }
    const StoredValues& values() const { return values_; }
    const std::vector<std::string>& unrecovered() const { return unrecovered_; }
    /// Assembled optimizer input. Throws Error(budget_exhausted) naming the
    /// unrecovered parameters.
    HemsParameters parameters() const;

    void on_trace(std::function<void(const RetrievalTrace&)> callback) { on_trace_.push_back(std::move(callback)); }

private:
    void start_episode();
    void close_episode();

    llm::GenerationClient& client_;
    RetrievalOptions options_;
    std::size_t task_index_ = 0;
    int attempt_ = 0;
    std::optional<TaskEpisode> episode_;
    std::vector<RetrievalTrace> traces_;
    StoredValues values_;
    std::vector<std::string> unrecovered_;
    std::vector<std::function<void(const RetrievalTrace&)>> on_trace_;
    bool done_ = false;
};

struct RetrievalResult {
    std::vector<RetrievalTrace> traces;
    StoredValues values;
    std::vector<std::string> unrecovered;
};

RetrievalResult run_retrieval(llm::GenerationClient& client, const RetrievalOptions& options, const AskUser& ask);

/// One JSON object per line.
void write_traces_jsonl(std::ostream& out, const std::vector<RetrievalTrace>& traces);

} // namespace hems::agent
