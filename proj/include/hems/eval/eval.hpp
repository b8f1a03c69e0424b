// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/agent/react.hpp"
#include "hems/llm/embedding.hpp"
#include "hems/llm/gateway.hpp"
#include "hems/user/persona.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hems::eval {

/// Cosine of two vectors. Throws InvalidArgument when either has zero norm
/// or the sizes differ.
double cosine(const llm::EmbeddingVector& a, const llm::EmbeddingVector& b);

/// Similarity of embed(question + " " + answer) and
/// embed(question + " " + perfect_answer).
double cosine_precision(const std::string& question, const std::string& answer, const std::string& perfect_answer,
                        llm::EmbeddingProvider& embedding);

/// Canonical form of a value for exact-match scoring: dates YYYY/MM/DD,
/// times HH:MM, counts as integers, temperatures as shortest decimals,
/// cities unchanged (case-sensitive).
std::optional<std::string> canonicalize(const std::string& parameter_id, const std::string& value);

/// Exact match after canonicalization, or byte equality when `raw_strict`.
bool values_match(const std::string& parameter_id, const std::string& stored, const std::string& expected,
                  bool raw_strict = false);

struct ParameterResult {
    std::string parameter_id;
    std::string expected;
    std::optional<std::string> stored;
    bool correct = false;
    int attempts = 0;
    int questions = 0;
    int generations = 0;
    int parse_errors = 0;
    double duration_s = 0.0;
};

struct TrialResult {
    agent::AgentType agent_type = agent::AgentType::react_with_example;
    user::Difficulty difficulty = user::Difficulty::easy;
    int trial = 0;
    std::uint64_t persona_seed = 0;
    user::PersonaGroundTruth truth;
    std::vector<ParameterResult> parameters;
    std::vector<agent::RetrievalTrace> traces;
    bool aborted = false;
    std::string error;
    double duration_s = 0.0;

    bool success() const;
    int questions() const;
    /// Agent instances used over the whole trial.
    int iterations() const;
};

struct PrecisionSample {
    user::Difficulty difficulty = user::Difficulty::easy;
    std::string parameter_id;
    std::string question;
    std::string answer;
    std::string perfect_answer;
    double score = 0.0;
};

/// Scores the scripted persona of every mode on the agent's standard
/// question for each parameter.
std::vector<PrecisionSample> scripted_precision_corpus(const std::vector<user::PersonaGroundTruth>& personas,
                                                       llm::EmbeddingProvider& embedding);

/// Scores every (question, answer) exchange recorded in the trials.
std::vector<PrecisionSample> dialogue_precision(const std::vector<TrialResult>& trials,
                                                llm::EmbeddingProvider& embedding);

/// Mean score per (difficulty, parameter).
nlohmann::json precision_table(const std::vector<PrecisionSample>& samples);

struct GridConfig {
    std::vector<agent::AgentType> agent_types{agent::all_agent_types().begin(), agent::all_agent_types().end()};
    std::vector<user::Difficulty> difficulties{user::all_difficulties().begin(), user::all_difficulties().end()};
    int trials = 20;
    /// Trial t uses persona randomize_truth(seed + t).
    std::uint64_t seed = 0;
    unsigned workers = 4;
    agent::AgentConfig agent;
    int retry_budget = 3;
    bool raw_strict = false;
};

using ClientFactory = std::function<std::unique_ptr<llm::GenerationClient>()>;

struct GridProviders {
    /// Agent model, one instance per trial.
    ClientFactory agent;
    /// User model, one instance per trial; empty selects the scripted persona.
    ClientFactory user;
    /// Used for precision; must be safe to call from one thread at a time.
    llm::EmbeddingProvider* embedding = nullptr;
};

struct GridResult {
    GridConfig config;
    std::vector<TrialResult> trials;
    std::vector<PrecisionSample> precision;
};

/// Runs agent_types x difficulties x trials on a bounded worker pool.
/// A provider failure aborts only its trial.
GridResult run_grid(const GridConfig& config, const GridProviders& providers);

/// Rows keyed by (agent_type, difficulty) with accuracy (%), mean
/// questions, mean iterations and mean duration, plus the accuracy table,
/// per-parameter retrieval rates, precision means and aborted trials.
nlohmann::json build_report(const GridResult& result);

/// Writes report.json, accuracy.csv, per_parameter.csv, episodes.csv,
/// precision.csv and durations.csv. Everything but the duration fields is
/// deterministic under scripted providers.
void write_report_files(const GridResult& result, const std::filesystem::path& dir);

} // namespace hems::eval
