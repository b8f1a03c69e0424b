// SPDX-License-Identifier: Apache-2.0
#include "hems/eval/eval.hpp"

#include "hems/agent/extract.hpp"
#include "hems/agent/rule_agent.hpp"
#include "hems/error.hpp"

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

namespace hems::eval {

namespace {

std::string short_name(user::Difficulty d)
{
    switch (d) {
    case user::Difficulty::easy:
        return "E";
    case user::Difficulty::medium:
        return "M";
    case user::Difficulty::hard:
        return "H";
    }
    return "?";
}

std::string csv_cell(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char c : text)
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::config, "cannot write " + path.string());
    return out;
}

TrialResult run_trial(const GridConfig& config, const GridProviders& providers, agent::AgentType type,
                      user::Difficulty difficulty, int trial)
{
    TrialResult result;
    result.agent_type = type;
    result.difficulty = difficulty;
    result.trial = trial;
    result.persona_seed = config.seed + static_cast<std::uint64_t>(trial);
    result.truth = user::randomize_truth(result.persona_seed);

    const auto started = std::chrono::steady_clock::now();
    std::unique_ptr<llm::GenerationClient> agent_client =
        providers.agent ? providers.agent() : std::make_unique<agent::RuleBasedAgentModel>();
    std::unique_ptr<llm::GenerationClient> user_client;
    std::unique_ptr<user::UserSimulator> persona;
    if (providers.user) {
        user_client = providers.user();
        persona = std::make_unique<user::LlmUser>(*user_client, difficulty, result.truth);
    } else {
        persona = std::make_unique<user::ScriptedUser>(difficulty, result.truth);
    }

    agent::RetrievalOptions options;
    options.agent = config.agent;
    options.agent.type = type;
    options.retry_budget = config.retry_budget;
    options.abort_on_provider_error = true;
    agent::RetrievalSession session(*agent_client, options);
    try {
        while (auto question = session.advance())
            session.answer(persona->answer(*question));
    } catch (const ProviderError& e) {
        result.aborted = true;
        result.error = e.what();
    }
    result.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.traces = session.traces();

    const auto expected = result.truth.expected_values();
    for (const auto& task : options.tasks) {
        ParameterResult p;
        p.parameter_id = task.parameter_id;
        p.expected = expected.at(task.parameter_id);
        for (const auto& t : result.traces) {
            if (t.parameter_id != task.parameter_id)
                continue;
            ++p.attempts;
            p.questions += t.questions_asked;
            p.generations += t.generations;
            p.parse_errors += t.parse_errors;
            p.duration_s += t.wall_time_s;
            if (t.stored_value)
                p.stored = t.stored_value;
        }
        p.correct = p.stored && values_match(p.parameter_id, *p.stored, p.expected, config.raw_strict);
        result.parameters.push_back(std::move(p));
    }
    return result;
}

} // namespace

double cosine(const llm::EmbeddingVector& a, const llm::EmbeddingVector& b)
{
    if (a.size() != b.size())
        throw InvalidArgument("embedding sizes differ: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw InvalidArgument("cosine similarity is undefined for a zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_precision(const std::string& question, const std::string& answer, const std::string& perfect_answer,
                        llm::EmbeddingProvider& embedding)
{
    if (question.empty() || answer.empty() || perfect_answer.empty())
        throw InvalidArgument("precision needs a nonempty question, answer and perfect answer");
    return cosine(embedding.embed(question + " " + answer), embedding.embed(question + " " + perfect_answer));
}

std::optional<std::string> canonicalize(const std::string& parameter_id, const std::string& value)
{
    if (parameter_id == "city")
        return value;
    if (parameter_id == "date_start" || parameter_id == "date_end") {
        if (auto d = extract::find_date(value))
            return d->canonical();
        return std::nullopt;
    }
    if (parameter_id == "ev_arrival_time" || parameter_id == "ev_departure_time") {
        if (auto t = extract::find_time(value))
            return t->canonical();
        return std::nullopt;
    }
    if (parameter_id == "ev_count") {
        if (auto n = extract::find_integer(value))
            return std::to_string(*n);
        return std::nullopt;
    }
    if (parameter_id == "t_min" || parameter_id == "t_max") {
        const auto numbers = extract::find_numbers(value);
        if (numbers.size() != 1)
            return std::nullopt;
        return fmt::format("{}", numbers.front());
    }
    return value;
}

bool values_match(const std::string& parameter_id, const std::string& stored, const std::string& expected,
                  bool raw_strict)
{
    if (raw_strict)
        return stored == expected;
    const auto a = canonicalize(parameter_id, stored);
    const auto b = canonicalize(parameter_id, expected);
    return a && b && *a == *b;
}

bool TrialResult::success() const
{
    if (aborted || parameters.empty())
        return false;
    for (const auto& p : parameters)
        if (!p.correct)
            return false;
    return true;
}

int TrialResult::questions() const
{
    int n = 0;
    for (const auto& p : parameters)
        n += p.questions;
    return n;
}

int TrialResult::iterations() const { return static_cast<int>(traces.size()); }

std::vector<PrecisionSample> scripted_precision_corpus(const std::vector<user::PersonaGroundTruth>& personas,
                                                       llm::EmbeddingProvider& embedding)
{
    std::vector<PrecisionSample> out;
    for (const auto& truth : personas)
        for (auto mode : user::all_difficulties())
            for (const auto& task : agent::default_tasks()) {
                PrecisionSample s;
                s.difficulty = mode;
                s.parameter_id = task.parameter_id;
                s.question = agent::RuleBasedAgentModel::question_for(task.parameter_id, 0);
                s.answer = user::scripted_answer(mode, truth, task.parameter_id);
                s.perfect_answer = user::perfect_answer(truth, task.parameter_id);
                s.score = cosine_precision(s.question, s.answer, s.perfect_answer, embedding);
                out.push_back(std::move(s));
            }
    return out;
}

std::vector<PrecisionSample> dialogue_precision(const std::vector<TrialResult>& trials,
                                                llm::EmbeddingProvider& embedding)
{
    std::vector<PrecisionSample> out;
    for (const auto& trial : trials)
        for (const auto& trace : trial.traces)
            for (const auto& [question, answer] : trace.dialogue) {
                if (question.empty() || answer.empty())
                    continue;
                PrecisionSample s;
                s.difficulty = trial.difficulty;
                s.parameter_id = trace.parameter_id;
                s.question = question;
                s.answer = answer;
                s.perfect_answer = user::perfect_answer(trial.truth, trace.parameter_id);
                s.score = cosine_precision(s.question, s.answer, s.perfect_answer, embedding);
                out.push_back(std::move(s));
            }
    return out;
}

nlohmann::json precision_table(const std::vector<PrecisionSample>& samples)
{
    std::map<std::pair<int, std::string>, std::pair<double, int>> sums;
    for (const auto& s : samples) {
        auto& [total, n] = sums[{static_cast<int>(s.difficulty), s.parameter_id}];
        total += s.score;
        ++n;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (auto mode : user::all_difficulties())
        for (const auto& task : agent::default_tasks()) {
            const auto it = sums.find({static_cast<int>(mode), task.parameter_id});
            if (it == sums.end())
                continue;
            rows.push_back({{"difficulty", short_name(mode)},
                            {"parameter_id", task.parameter_id},
                            {"mean", it->second.first / it->second.second},
                            {"samples", it->second.second}});
        }
    return rows;
}

GridResult run_grid(const GridConfig& config, const GridProviders& providers)
{
    if (config.trials < 1)
        throw InvalidArgument("trials must be at least 1");
    if (config.agent_types.empty() || config.difficulties.empty())
        throw InvalidArgument("the grid needs at least one agent type and one difficulty");

    struct Cell {
        agent::AgentType type;
        user::Difficulty difficulty;
        int trial;
    };
    std::vector<Cell> cells;
    for (auto type : config.agent_types)
        for (auto difficulty : config.difficulties)
            for (int t = 0; t < config.trials; ++t)
                cells.push_back({type, difficulty, t});

    GridResult result;
    result.config = config;
    result.trials.resize(cells.size());
    std::atomic<std::size_t> next = 0;
    std::vector<std::exception_ptr> failures(cells.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                result.trials[i] = run_trial(config, providers, cells[i].type, cells[i].difficulty, cells[i].trial);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(cells.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    for (auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    llm::ToyEmbedding fallback;
    result.precision = dialogue_precision(result.trials, providers.embedding ? *providers.embedding : fallback);
    return result;
}

nlohmann::json build_report(const GridResult& result)
{
    const auto& cfg = result.config;
    nlohmann::json config = {{"trials", cfg.trials},
                             {"seed", cfg.seed},
                             {"retry_budget", cfg.retry_budget},
                             {"max_generations", cfg.agent.max_generations},
                             {"raw_strict", cfg.raw_strict}};
    for (auto t : cfg.agent_types)
        config["agent_types"].push_back(agent::to_string(t));
    for (auto d : cfg.difficulties)
        config["difficulties"].push_back(short_name(d));

    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json table = nlohmann::json::array();
    nlohmann::json per_parameter = nlohmann::json::array();
    nlohmann::json aborted = nlohmann::json::array();
    for (auto type : cfg.agent_types) {
        nlohmann::json table_row = {{"agent_type", agent::to_string(type)}};
        for (auto difficulty : cfg.difficulties) {
            int completed = 0, successes = 0, aborted_count = 0;
            double questions = 0, iterations = 0, duration = 0;
            std::map<std::string, int> retrieved;
            for (const auto& trial : result.trials) {
                if (trial.agent_type != type || trial.difficulty != difficulty)
                    continue;
                if (trial.aborted) {
                    ++aborted_count;
                    aborted.push_back({{"agent_type", agent::to_string(type)},
                                       {"difficulty", short_name(difficulty)},
                                       {"trial", trial.trial},
                                       {"error", trial.error}});
                    continue;
                }
                ++completed;
                successes += trial.success() ? 1 : 0;
                questions += trial.questions();
                iterations += trial.iterations();
                duration += trial.duration_s;
                for (const auto& p : trial.parameters)
                    retrieved[p.parameter_id] += p.correct ? 1 : 0;
            }
            auto mean = [&](double total) {
                return completed ? nlohmann::json(total / completed) : nlohmann::json(nullptr);
            };
            const nlohmann::json accuracy = completed ? nlohmann::json(100.0 * successes / completed) : nullptr;
            rows.push_back({{"agent_type", agent::to_string(type)},
                            {"difficulty", short_name(difficulty)},
                            {"trials", completed + aborted_count},
                            {"completed", completed},
                            {"aborted", aborted_count},
                            {"accuracy", accuracy},
                            {"mean_questions", mean(questions)},
                            {"mean_iterations", mean(iterations)},
                            {"mean_duration", mean(duration)}});
            table_row[short_name(difficulty)] = accuracy;
            for (const auto& task : agent::default_tasks()) {
                const int hits = retrieved[task.parameter_id];
                per_parameter.push_back(
                    {{"agent_type", agent::to_string(type)},
                     {"difficulty", short_name(difficulty)},
                     {"parameter_id", task.parameter_id},
                     {"retrieved", hits},
                     {"completed", completed},
                     {"rate", completed ? nlohmann::json(100.0 * hits / completed) : nlohmann::json(nullptr)}});
            }
        }
        table.push_back(std::move(table_row));
    }
    return {{"config", config},
            {"rows", rows},
            {"accuracy_table", table},
            {"per_parameter", per_parameter},
            {"precision", precision_table(result.precision)},
            {"aborted_trials", aborted}};
}

void write_report_files(const GridResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto report = build_report(result);
    open_output(dir / "report.json") << report.dump(2) << '\n';

    auto number = [](const nlohmann::json& v) { return v.is_null() ? std::string() : fmt::format("{}", v.get<double>()); };

    auto accuracy = open_output(dir / "accuracy.csv");
    accuracy << "agent_type";
    for (auto d : result.config.difficulties)
        accuracy << ',' << short_name(d);
    accuracy << '\n';
    for (const auto& row : report["accuracy_table"]) {
        accuracy << row["agent_type"].get<std::string>();
        for (auto d : result.config.difficulties)
            accuracy << ',' << number(row[short_name(d)]);
        accuracy << '\n';
    }

    auto per_parameter = open_output(dir / "per_parameter.csv");
    per_parameter << "agent_type,difficulty,parameter_id,retrieved,completed,rate\n";
    for (const auto& r : report["per_parameter"])
        per_parameter << fmt::format("{},{},{},{},{},{}\n", r["agent_type"].get<std::string>(),
                                     r["difficulty"].get<std::string>(), r["parameter_id"].get<std::string>(),
                                     r["retrieved"].get<int>(), r["completed"].get<int>(), number(r["rate"]));

    auto episodes = open_output(dir / "episodes.csv");
    episodes << "agent_type,difficulty,trial,persona_seed,parameter_id,expected,stored,correct,attempts,questions,"
                "generations,parse_errors,aborted\n";
    auto durations = open_output(dir / "durations.csv");
    durations << "agent_type,difficulty,trial,parameter_id,duration_s\n";
    for (const auto& trial : result.trials) {
        const std::string type(agent::to_string(trial.agent_type));
        const std::string diff = short_name(trial.difficulty);
        for (const auto& p : trial.parameters) {
            episodes << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", type, diff, trial.trial,
                                    trial.persona_seed, p.parameter_id, csv_cell(p.expected),
                                    csv_cell(p.stored.value_or("")), p.correct ? 1 : 0, p.attempts, p.questions,
                                    p.generations, p.parse_errors, trial.aborted ? 1 : 0);
            durations << fmt::format("{},{},{},{},{}\n", type, diff, trial.trial, p.parameter_id, p.duration_s);
        }
        durations << fmt::format("{},{},{},{},{}\n", type, diff, trial.trial, "trial", trial.duration_s);
    }

    auto precision = open_output(dir / "precision.csv");
    precision << "difficulty,parameter_id,question,answer,perfect_answer,score\n";
    for (const auto& s : result.precision)
        precision << fmt::format("{},{},{},{},{},{}\n", short_name(s.difficulty), s.parameter_id,
                                 csv_cell(s.question), csv_cell(s.answer), csv_cell(s.perfect_answer), s.score);
}

} // namespace hems::eval
