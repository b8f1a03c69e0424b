// SPDX-License-Identifier: Apache-2.0
#include "hems/service/session.hpp"

#include "hems/core/hems.hpp"
#include "hems/error.hpp"
#include "hems/synth/synth.hpp"

#include <fstream>
#include <random>

namespace hems::service {

namespace {

std::vector<double> end_of_step(const std::vector<double>& boundary, std::size_t steps)
{
    if (boundary.size() == steps + 1)
        return {boundary.begin() + 1, boundary.end()};
    return std::vector<double>(steps, 0.0);
}

} // namespace

std::string_view to_string(SessionState state)
{
    switch (state) {
    case SessionState::awaiting_question:
        return "awaiting_question";
    case SessionState::awaiting_answer:
        return "awaiting_answer";
    case SessionState::optimizing:
        return "optimizing";
    case SessionState::done:
        return "done";
    case SessionState::failed:
        return "failed";
    }
    return "unknown";
}

nlohmann::json schedule_series(const Schedule& optimized, const Schedule& naive, const HemsParameters& params)
{
    const std::size_t n = optimized.size();
    nlohmann::json stamps = nlohmann::json::array();
    for (const auto& t : optimized.timestamps)
        stamps.push_back(t.iso());
    std::vector<int> occupancy;
    for (bool home : optimized.occupancy)
        occupancy.push_back(home ? 1 : 0);
    const double reduction =
        naive.total_cost != 0.0 ? 100.0 * (naive.total_cost - optimized.total_cost) / naive.total_cost : 0.0;
    return {
        {"dt_hours", optimized.dt_hours},
        {"timestamps", stamps},
        {"price", {{"pi_e", optimized.pi_e}, {"pi_s", optimized.pi_s}}},
        {"power",
         {{"p_heat", optimized.p_heat},
          {"p_ev", optimized.p_ev},
          {"p_other", optimized.p_other},
          {"p_solar", optimized.p_solar},
          {"p_total", optimized.p_total},
          {"occupancy", occupancy}}},
        {"ev_battery", {{"e_ev", end_of_step(optimized.e_ev, n)}}},
        {"temperature",
         {{"t_house", end_of_step(optimized.t_house, n)},
          {"t_ext", optimized.t_ext},
          {"t_min", params.t_min},
          {"t_max", params.t_max}}},
        {"summary",
         {{"total_cost", optimized.total_cost},
          {"naive_cost", naive.total_cost},
          {"reduction_percent", reduction}}},
    };
}

Session::Session(std::string id, std::unique_ptr<llm::GenerationClient> client, SessionOptions options)
    : id_(std::move(id)), client_(std::move(client)), options_(std::move(options)),
      retrieval_(*client_, [&] {
          agent::RetrievalOptions r;
          r.agent = options_.agent;
          r.retry_budget = options_.retry_budget;
          r.abort_on_provider_error = true;
          return r;
      }()),
      last_active_(Clock::now())
{
    retrieval_.on_trace([this](const agent::RetrievalTrace& trace) {
        if (trace.stored_value)
            emit("parameter_stored", {{"parameter_id", trace.parameter_id}, {"value", *trace.stored_value}});
    });
}

void Session::emit(std::string type, nlohmann::json data)
{
    {
        std::lock_guard lock(data_);
        events_.push_back({events_.size() + 1, std::move(type), std::move(data)});
        last_active_ = Clock::now();
    }
    changed_.notify_all();
}

void Session::set_state(SessionState state)
{
    {
        std::lock_guard lock(data_);
        if (state_ == state)
            return;
        state_ = state;
    }
    emit("state_changed", {{"state", to_string(state)}});
}

void Session::start()
{
    std::unique_lock work(work_, std::try_to_lock);
    if (!work)
        throw StateError("session " + id_ + " is busy");
    run_until_pause();
}

void Session::run_until_pause()
{
    set_state(SessionState::awaiting_question);
    std::optional<std::string> question;
    try {
        question = retrieval_.advance();
    } catch (const ProviderError& e) {
        {
            std::lock_guard lock(data_);
            error_ = e.what();
        }
        set_state(SessionState::failed);
        emit("failed", {{"error", e.what()}});
        throw;
    }
    if (question) {
        const std::string parameter = retrieval_.current_parameter();
        {
            std::lock_guard lock(data_);
            question_ = question;
            transcript_.push_back({{"role", "agent"}, {"text", *question}, {"parameter_id", parameter}});
        }
        emit("question_asked", {{"question", *question}, {"parameter_id", parameter}});
        set_state(SessionState::awaiting_answer);
        return;
    }
    optimize();
}

void Session::optimize()
{
    set_state(SessionState::optimizing);
    try {
        const HemsParameters params = retrieval_.parameters();
        const auto scenario = synth::make_scenario(params.city, params.date_start, params.date_end,
                                                   options_.hems.dt_hours, options_.scenario_seed, options_.tariff);
        const auto problem = build_problem(params, options_.hems.thermal, options_.hems.ev, scenario);
        const auto optimized = solve(problem);
        const auto naive = naive_schedule(params, options_.hems.thermal, options_.hems.ev, scenario);
        {
            std::lock_guard lock(data_);
            schedule_ = schedule_series(optimized, naive, params);
        }
        set_state(SessionState::done);
        emit("schedule_ready", {{"total_cost", optimized.total_cost}, {"naive_cost", naive.total_cost}});
    } catch (const Error& e) {
        {
            std::lock_guard lock(data_);
            error_ = e.what();
        }
        set_state(SessionState::failed);
        emit("failed", {{"error", e.what()}});
    }
}

void Session::submit_answer(const std::string& text)
{
    std::unique_lock work(work_, std::try_to_lock);
    if (!work)
        throw StateError("session " + id_ + " is busy with another request");
    {
        std::lock_guard lock(data_);
        if (state_ != SessionState::awaiting_answer)
            throw StateError("session " + id_ + " is " + std::string(to_string(state_)) + ", not awaiting an answer");
        transcript_.push_back({{"role", "user"}, {"text", text}});
        question_.reset();
    }
    emit("answer_received", {{"answer", text}});
    retrieval_.answer(text);
    run_until_pause();
}

SessionState Session::state() const
{
    std::lock_guard lock(data_);
    return state_;
}

bool Session::finished() const
{
    const auto s = state();
    return s == SessionState::done || s == SessionState::failed;
}

Session::Clock::time_point Session::last_active() const
{
    std::lock_guard lock(data_);
    return last_active_;
}

nlohmann::json Session::snapshot() const
{
    std::lock_guard lock(data_);
    return snapshot_locked();
}

nlohmann::json Session::snapshot_locked() const
{
    std::map<std::string, std::string> stored;
    std::map<std::string, std::string> failed;
    std::string active;
    for (const auto& e : events_) {
        if (e.type == "parameter_stored")
            stored[e.data["parameter_id"].get<std::string>()] = e.data["value"].get<std::string>();
        if (e.type == "question_asked")
            active = e.data["parameter_id"].get<std::string>();
    }
    nlohmann::json parameters = nlohmann::json::array();
    for (const auto& task : agent::default_tasks()) {
        nlohmann::json p = {{"parameter_id", task.parameter_id}, {"status", "pending"}, {"value", nullptr}};
        if (auto it = stored.find(task.parameter_id); it != stored.end()) {
            p["status"] = "stored";
            p["value"] = it->second;
        } else if (state_ == SessionState::awaiting_answer && task.parameter_id == active) {
            p["status"] = "active";
        } else if (state_ == SessionState::failed && !active.empty() && task.parameter_id == active) {
            p["status"] = "failed";
        }
        parameters.push_back(std::move(p));
    }
    return {{"session_id", id_},
            {"state", to_string(state_)},
            {"question", question_ ? nlohmann::json(*question_) : nlohmann::json(nullptr)},
            {"transcript", transcript_},
            {"parameters", parameters},
            {"schedule_ready", schedule_.has_value()},
            {"error", error_.empty() ? nlohmann::json(nullptr) : nlohmann::json(error_)},
            {"last_event", events_.size()}};
}

nlohmann::json Session::schedule() const
{
    std::lock_guard lock(data_);
    if (!schedule_)
        throw StateError("session " + id_ + " has no schedule yet (state " + std::string(to_string(state_)) + ")");
    return *schedule_;
}

std::vector<SessionEvent> Session::events_after(std::uint64_t after, std::chrono::milliseconds timeout) const
{
    std::unique_lock lock(data_);
    auto ready = [&] {
        return events_.size() > after || state_ == SessionState::done || state_ == SessionState::failed;
    };
    changed_.wait_for(lock, timeout, ready);
    if (events_.size() <= after)
        return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(after), events_.end()};
}

SessionManager::SessionManager(ClientFactory factory, SessionOptions options, std::chrono::duration<double> ttl,
                               std::filesystem::path snapshot_dir)
    : factory_(std::move(factory)), options_(std::move(options)), ttl_(ttl), snapshot_dir_(std::move(snapshot_dir))
{
    if (!snapshot_dir_.empty())
        std::filesystem::create_directories(snapshot_dir_);
}

std::shared_ptr<Session> SessionManager::create()
{
    evict_idle();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        static thread_local std::mt19937_64 rng(std::random_device{}());
        id = std::to_string(++counter_) + "-" + std::to_string(rng() % 1000000007ULL);
    }
    auto session = std::make_shared<Session>(id, factory_(), options_);
    session->start();
    {
        std::lock_guard lock(mutex_);
        sessions_[id] = session;
    }
    persist(*session);
    return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id)
{
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw NotFound("unknown session '" + id + "'");
    return it->second;
}

std::size_t SessionManager::evict_idle()
{
    const auto now = Session::Clock::now();
    std::lock_guard lock(mutex_);
    std::size_t evicted = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_active() > ttl_) {
            it = sessions_.erase(it);
            ++evicted;
        } else {
            ++it;
        }
    }
    return evicted;
}

std::size_t SessionManager::size() const
{
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SessionManager::persist(const Session& session) const
{
    if (snapshot_dir_.empty())
        return;
    auto snap = session.snapshot();
    if (session.state() == SessionState::done)
        snap["schedule"] = session.schedule();
    const auto tmp = snapshot_dir_ / (session.id() + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << snap.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, snapshot_dir_ / (session.id() + ".json"));
}

} // namespace hems::service
