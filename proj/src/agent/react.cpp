// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/react.hpp"

#include "hems/error.hpp"

#include <ostream>

namespace hems::agent {

std::vector<std::string> AgentConfig::tool_names() const
{
    std::vector<std::string> names;
    for (const auto& t : tools)
        names.push_back(t.name);
    return names;
}

std::string_view to_string(TaskOutcome outcome)
{
    switch (outcome) {
    case TaskOutcome::success:
        return "success";
    case TaskOutcome::max_iterations:
        return "max_iterations";
    case TaskOutcome::parse_failure_exhausted:
        return "parse_failure_exhausted";
    case TaskOutcome::provider_error:
        return "provider_error";
    }
    return "unknown";
}

nlohmann::json RetrievalTrace::to_json() const
{
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : transcript)
        segments.push_back({{"kind", s.kind == TranscriptSegment::Kind::generation ? "generation" : "observation"},
                            {"text", s.text}});
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& [q, a] : dialogue)
        turns.push_back({{"question", q}, {"answer", a}});
    return {
        {"parameter_id", parameter_id},
        {"task", task_text},
        {"attempt", attempt},
        {"outcome", to_string(outcome)},
        {"stored_value", stored_value ? nlohmann::json(*stored_value) : nlohmann::json(nullptr)},
        {"generations", generations},
        {"questions_asked", questions_asked},
        {"parse_errors", parse_errors},
        {"lenient_parse", lenient_parse},
        {"healed_parse", healed_parse},
        {"error", error},
        {"wall_time_s", wall_time_s},
        {"dialogue", turns},
        {"transcript", segments},
    };
}

TaskEpisode::TaskEpisode(llm::GenerationClient& client, ParameterTask task, AgentConfig config, int attempt)
    : client_(client), task_(std::move(task)), config_(std::move(config)), tool_names_(config_.tool_names())
{
    if (config_.max_generations < 1)
        throw InvalidArgument("max_generations must be at least 1");
    prompt_ = render_agent_prompt(config_.type, config_.tools, task_.task_text);
    trace_.parameter_id = task_.parameter_id;
    trace_.task_text = task_.task_text;
    trace_.attempt = attempt;
}

void TaskEpisode::observe(const std::string& response, const std::string& observation)
{
    prompt_ += response;
    if (!response.empty() && response.back() != '\n')
        prompt_ += '\n';
    prompt_ += "Observation: " + observation + "\n";
    trace_.transcript.push_back({TranscriptSegment::Kind::observation, observation});
}

void TaskEpisode::finish(TaskOutcome outcome)
{
    trace_.outcome = outcome;
    done_ = true;
    pending_.reset();
    trace_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

std::optional<std::string> TaskEpisode::advance()
{
    if (!started_) {
        started_ = true;
        start_ = std::chrono::steady_clock::now();
    }
    while (!done_ && !pending_) {
        if (trace_.generations >= config_.max_generations) {
            finish(TaskOutcome::max_iterations);
            break;
        }
        std::string response;
        try {
            llm::GenerationRequest request{prompt_, config_.stop, config_.max_tokens, config_.generation_options};
            response = client_.generate(request);
        } catch (const ProviderError& e) {
            trace_.error = e.what();
            finish(TaskOutcome::provider_error);
            break;
        }
        ++trace_.generations;
        trace_.transcript.push_back({TranscriptSegment::Kind::generation, response});

        const ParsedStep step = parse_response(response, tool_names_);
        trace_.lenient_parse = trace_.lenient_parse || step.lenient;
        trace_.healed_parse = trace_.healed_parse || step.healed;

        if (const auto* failure = step.failure()) {
            ++trace_.parse_errors;
            ++consecutive_parse_errors_;
            observe(response, failure->observation);
            if (config_.max_consecutive_parse_errors > 0 &&
                consecutive_parse_errors_ >= config_.max_consecutive_parse_errors) {
                trace_.error = failure->error;
                finish(TaskOutcome::parse_failure_exhausted);
            }
            continue;
        }
        consecutive_parse_errors_ = 0;

        if (step.final_answer()) {
            // A final answer without a stored value does not end the task.
            prompt_ += response;
            continue;
        }

        const ToolCall& call = *step.tool_call();
        if (call.action == "ask_user") {
            const auto& input = call.action_input;
            pending_ = input.is_string() ? input.get<std::string>() : input.dump();
            last_response_ = response;
            ++trace_.questions_asked;
            break;
        }
        const StoreOutcome stored = store_validate(task_, call.action_input);
        observe(response, stored.observation);
        if (stored.ok) {
            trace_.stored_value = stored.canonical;
            finish(TaskOutcome::success);
        }
    }
    return pending_;
}

void TaskEpisode::answer(const std::string& text)
{
    if (!pending_)
        throw StateError("no question is pending for task '" + task_.parameter_id + "'");
    trace_.dialogue.emplace_back(*pending_, text);
    pending_.reset();
    observe(last_response_, text);
    last_response_.clear();
}

RetrievalTrace run_task(llm::GenerationClient& client, const ParameterTask& task, const AgentConfig& config,
                        const AskUser& ask, int attempt)
{
    TaskEpisode episode(client, task, config, attempt);
    while (auto question = episode.advance())
        episode.answer(ask(*question));
    return episode.trace();
}

RetrievalSession::RetrievalSession(llm::GenerationClient& client, RetrievalOptions options)
    : client_(client), options_(std::move(options))
{
    if (options_.retry_budget < 0)
        throw InvalidArgument("retry_budget must not be negative");
    if (options_.tasks.empty())
        done_ = true;
}

const std::optional<std::string>& RetrievalSession::pending_question() const
{
    static const std::optional<std::string> none;
    return episode_ ? episode_->pending_question() : none;
}

std::string RetrievalSession::current_parameter() const
{
    return done_ ? std::string() : options_.tasks[task_index_].parameter_id;
}

void RetrievalSession::start_episode()
{
    ++attempt_;
    episode_.emplace(client_, options_.tasks[task_index_], options_.agent, attempt_);
}

void RetrievalSession::close_episode()
{
    const RetrievalTrace trace = episode_->trace();
    traces_.push_back(trace);
    for (const auto& callback : on_trace_)
        callback(trace);
    episode_.reset();

    const auto& id = options_.tasks[task_index_].parameter_id;
    const bool stored = trace.stored_value.has_value();
    if (stored)
        values_[id] = *trace.stored_value;
    if (trace.outcome == TaskOutcome::provider_error && options_.abort_on_provider_error) {
        done_ = true;
        throw ProviderError(trace.error);
    }
    if (!stored && attempt_ <= options_.retry_budget)
        return;
    if (!stored)
        unrecovered_.push_back(id);
    attempt_ = 0;
    if (++task_index_ == options_.tasks.size())
        done_ = true;
}

std::optional<std::string> RetrievalSession::advance()
{
    while (!done_) {
        if (!episode_)
            start_episode();
        if (auto question = episode_->advance())
            return question;
        close_episode();
    }
    return std::nullopt;
}

void RetrievalSession::answer(const std::string& text)
{
    if (!episode_)
        throw StateError("no question is pending");
    episode_->answer(text);
}

HemsParameters RetrievalSession::parameters() const
{
    if (!unrecovered_.empty()) {
        std::string names;
        for (const auto& id : unrecovered_)
            names += (names.empty() ? "" : ", ") + id;
        throw Error(ErrorCode::budget_exhausted, "retry budget exhausted for: " + names);
    }
    return assemble_parameters(values_);
}

RetrievalResult run_retrieval(llm::GenerationClient& client, const RetrievalOptions& options, const AskUser& ask)
{
    RetrievalSession session(client, options);
    while (auto question = session.advance())
        session.answer(ask(*question));
    return {session.traces(), session.values(), session.unrecovered()};
}

void write_traces_jsonl(std::ostream& out, const std::vector<RetrievalTrace>& traces)
{
    for (const auto& t : traces)
        out << t.to_json().dump() << '\n';
}

} // namespace hems::agent
