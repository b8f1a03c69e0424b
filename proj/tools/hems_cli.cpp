// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/rule_agent.hpp"
#include "hems/config/config.hpp"
#include "hems/core/hems.hpp"
#include "hems/core/schedule_io.hpp"
#include "hems/error.hpp"
#include "hems/service/server.hpp"
#include "hems/synth/synth.hpp"
#include "hems/user/persona.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

using namespace hems;

namespace {

enum Exit { ok = 0, other = 1, usage = 2, parse = 3, infeasible = 4, provider = 5 };

int exit_code(const Error& e)
{
    switch (e.code()) {
    case ErrorCode::config:
    case ErrorCode::invalid_argument:
        return usage;
    case ErrorCode::parse:
        return parse;
    case ErrorCode::infeasible:
        return infeasible;
    case ErrorCode::provider:
        return provider;
    default:
        return other;
    }
}

Date date_option(const std::string& text, const char* flag)
{
    if (auto d = parse_canonical_date(text))
        return *d;
    if (auto d = parse_iso_date(text))
        return *d;
    throw ConfigError(std::string(flag) + ": expected YYYY/MM/DD, got '" + text + "'");
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    return out;
}

// Values come as the eight parameter ids, in any form the store tool accepts.
HemsParameters read_params(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open parameter file " + path.string());
    nlohmann::json tree;
    try {
        tree = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!tree.is_object())
        throw ParseError(path.string() + ": expected an object keyed by parameter id");
    agent::StoredValues values;
    for (const auto& [key, raw] : tree.items()) {
        const auto& tasks = agent::default_tasks();
        if (std::none_of(tasks.begin(), tasks.end(), [&](const auto& t) { return t.parameter_id == key; }))
            throw ParseError(path.string() + ": unknown parameter '" + key + "'");
        const auto outcome = agent::store_validate(agent::find_task(key), raw);
        if (!outcome.ok)
            throw ParseError(path.string() + ": " + key + ": " + outcome.observation);
        values[key] = outcome.canonical;
    }
    try {
        return agent::assemble_parameters(values);
    } catch (const InvalidArgument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

struct Outcome {
    Schedule optimized;
    Schedule naive;
};

Outcome optimize(const config::RunConfig& config, const HemsParameters& params, const ScenarioSeries& scenario)
{
    const auto problem = build_problem(params, config.hems.thermal, config.hems.ev, scenario);
    return {solve(problem), naive_schedule(params, config.hems.thermal, config.hems.ev, scenario)};
}

void print_summary(const Outcome& o)
{
    const double reduction =
        o.naive.total_cost > 0.0 ? 100.0 * (o.naive.total_cost - o.optimized.total_cost) / o.naive.total_cost : 0.0;
    fmt::print("total_cost: {:.4f}\nnaive_cost: {:.4f}\nreduction: {:.2f}%\n", o.optimized.total_cost,
               o.naive.total_cost, reduction);
}

ScenarioSeries scenario_for(const config::RunConfig& config, const HemsParameters& params,
                            const std::string& scenario_path)
{
    if (scenario_path.empty())
        return synth::make_scenario(params.city, params.date_start, params.date_end, config.hems.dt_hours,
                                    config.scenario_seed, config.tariff);
    const auto full = synth::load_scenario_csv(scenario_path);
    return slice_to_dates(full, params.date_start, params.date_end);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Household energy scheduling with conversational parameter retrieval"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

    auto* solve_cmd = app.add_subcommand("solve", "Optimize a schedule for given household parameters");
    std::string params_path, scenario_path, schedule_out;
    solve_cmd->add_option("--params", params_path, "JSON object of the eight parameters")->required();
    solve_cmd->add_option("--scenario", scenario_path, "Scenario CSV; synthesized when absent");
    solve_cmd->add_option("--out", schedule_out, "Schedule CSV output");

    auto* chat_cmd = app.add_subcommand("chat", "Retrieve the parameters in a terminal dialogue");
    std::string scripted_user, traces_out, chat_schedule_out;
    std::optional<std::uint64_t> persona_seed;
    chat_cmd->add_option("--scripted-user", scripted_user, "Answer with a simulated persona: easy, medium or hard");
    chat_cmd->add_option("--persona-seed", persona_seed, "Random persona instead of the reference household");
    chat_cmd->add_option("--traces", traces_out, "Write agent traces as JSON lines");
    chat_cmd->add_option("--out", chat_schedule_out, "Schedule CSV output");

    auto* eval_cmd = app.add_subcommand("evaluate", "Run the agent x difficulty evaluation grid");
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::vector<std::string> agent_types, difficulties;
    std::string eval_out;
    bool scripted = false;
    eval_cmd->add_option("--trials", trials, "Trials per grid cell")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", seed, "Persona seed");
    eval_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--agent-types", agent_types, "Act, Act+example, ReAct+example")->delimiter(',');
    eval_cmd->add_option("--difficulties", difficulties, "easy, medium, hard")->delimiter(',');
    eval_cmd->add_flag("--scripted", scripted, "Offline rule-based agent and scripted personas");
    eval_cmd->add_option("--out", eval_out, "Report directory");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP session service");
    std::optional<std::string> host;
    std::optional<int> port;
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port, 0 for an ephemeral one");

    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic scenario CSV");
    std::string city = "London", start = "2024/09/16", gen_out;
    int days = 7;
    std::optional<double> dt;
    std::optional<std::uint64_t> gen_seed;
    gen_cmd->add_option("--city", city, "City name");
    gen_cmd->add_option("--start", start, "First day, YYYY/MM/DD");
    gen_cmd->add_option("--days", days, "Number of days")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--dt", dt, "Step length in hours");
    gen_cmd->add_option("--seed", gen_seed, "Weather seed");
    gen_cmd->add_option("--out", gen_out, "Output file; stdout when absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        config::RunConfig config = config_path.empty() ? config::RunConfig{} : config::load_config(config_path);
        config::apply_environment(config);

        if (*solve_cmd) {
            const auto params = read_params(params_path);
            const auto outcome = optimize(config, params, scenario_for(config, params, scenario_path));
            if (!schedule_out.empty()) {
                auto out = open_output(schedule_out);
                write_schedule_csv(out, outcome.optimized);
            }
            print_summary(outcome);
        } else if (*chat_cmd) {
            auto client = config::make_agent_client(config.provider);
            agent::RetrievalOptions options;
            options.agent = config.agent;
            options.retry_budget = config.retry_budget;
            options.abort_on_provider_error = true;
            agent::AskUser ask;
            std::unique_ptr<user::UserSimulator> persona;
            std::unique_ptr<llm::GenerationClient> user_client;
            if (!scripted_user.empty()) {
                const auto mode = user::parse_difficulty(scripted_user);
                const auto truth = persona_seed ? user::randomize_truth(*persona_seed) : user::reference_persona();
                if (config.user_provider.kind == "remote") {
                    user_client = std::make_unique<llm::RemoteProvider>(config.user_provider.remote);
                    persona = std::make_unique<user::LlmUser>(*user_client, mode, truth);
                } else {
                    persona = std::make_unique<user::ScriptedUser>(mode, truth);
                }
                ask = [&](const std::string& q) {
                    const auto a = persona->answer(q);
                    fmt::print("agent: {}\nuser:  {}\n", q, a);
                    return a;
                };
            } else {
                ask = [](const std::string& q) {
                    fmt::print("agent: {}\n> ", q);
                    std::fflush(stdout);
                    std::string line;
                    if (!std::getline(std::cin, line))
                        throw StateError("input closed before the dialogue finished");
                    return line;
                };
            }
            const auto result = agent::run_retrieval(*client, options, ask);
            if (!traces_out.empty()) {
                auto out = open_output(traces_out);
                agent::write_traces_jsonl(out, result.traces);
            }
            for (const auto& [id, value] : result.values)
                fmt::print("stored {} = {}\n", id, value);
            if (!result.unrecovered.empty()) {
                std::string names;
                for (const auto& id : result.unrecovered)
                    names += (names.empty() ? "" : ", ") + id;
                throw Error(ErrorCode::budget_exhausted, "no value stored for " + names);
            }
            const auto params = agent::assemble_parameters(result.values);
            const auto outcome = optimize(config, params, scenario_for(config, params, ""));
            if (!chat_schedule_out.empty()) {
                auto out = open_output(chat_schedule_out);
                write_schedule_csv(out, outcome.optimized);
            }
            print_summary(outcome);
        } else if (*eval_cmd) {
            auto grid = config.evaluation;
            if (trials)
                grid.trials = *trials;
            if (seed)
                grid.seed = *seed;
            if (workers)
                grid.workers = *workers;
            if (!agent_types.empty()) {
                grid.agent_types.clear();
                for (const auto& t : agent_types)
                    grid.agent_types.push_back(agent::parse_agent_type(t));
            }
            if (!difficulties.empty()) {
                grid.difficulties.clear();
                for (const auto& d : difficulties)
                    grid.difficulties.push_back(user::parse_difficulty(d));
            }
            config::ProviderConfig agent_provider = config.provider, user_provider = config.user_provider;
            config::EmbeddingConfig embedding_config = config.embedding;
            if (scripted) {
                agent_provider.kind = user_provider.kind = "scripted";
                embedding_config.kind = "toy";
            }
            eval::GridProviders providers;
            if (agent_provider.kind == "remote")
                providers.agent = [remote = agent_provider.remote] {
                    return std::make_unique<llm::RemoteProvider>(remote);
                };
            providers.user = config::make_user_factory(user_provider);
            const auto embedding = config::make_embedding(embedding_config);
            providers.embedding = embedding.get();
            const auto result = eval::run_grid(grid, providers);
            const std::filesystem::path dir = eval_out.empty() ? config.output_dir : eval_out;
            eval::write_report_files(result, dir);
            const auto report = eval::build_report(result);
            fmt::print("{:<15}{:<11}{:>9}{:>11}{:>12}{:>9}\n", "agent", "difficulty", "accuracy", "questions",
                       "iterations", "aborted");
            for (const auto& row : report["rows"])
                fmt::print("{:<15}{:<11}{:>8.1f}%{:>11.2f}{:>12.2f}{:>9}\n", row["agent_type"].get<std::string>(),
                           row["difficulty"].get<std::string>(), row["accuracy"].get<double>(),
                           row["mean_questions"].get<double>(), row["mean_iterations"].get<double>(),
                           row["aborted"].get<int>());
            fmt::print("reports written to {}\n", dir.string());
        } else if (*serve_cmd) {
            if (host)
                config.service.host = *host;
            if (port)
                config.service.port = *port;
            service::SessionManager sessions(
                [provider = config.provider] { return config::make_agent_client(provider); },
                service::session_options(config), std::chrono::duration<double>(config.service.session_ttl_s),
                config.service.snapshot_dir);
            service::Server server(sessions, config.service);
            const int bound = server.bind();
            fmt::print("listening on http://{}:{}\n", config.service.host, bound);
            std::fflush(stdout);
            server.listen();
        } else if (*gen_cmd) {
            const Date first = date_option(start, "--start");
            const Date last = Date::from_days(first.to_days() + days - 1);
            const auto scenario = synth::make_scenario(city, first, last, dt.value_or(config.hems.dt_hours),
                                                       gen_seed.value_or(config.scenario_seed), config.tariff);
            if (gen_out.empty()) {
                synth::write_scenario_csv(std::cout, scenario);
            } else {
                auto out = open_output(gen_out);
                synth::write_scenario_csv(out, scenario);
                fmt::print("{} rows written to {}\n", scenario.size(), gen_out);
            }
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error ({}): {}\n", to_string(e.code()), e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return other;
    }
    return ok;
}
