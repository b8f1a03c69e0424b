// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/agent/react.hpp"
#include "hems/core/types.hpp"
#include "hems/eval/eval.hpp"
#include "hems/llm/remote.hpp"
#include "hems/synth/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace hems::config {

struct ProviderConfig {
    /// "scripted" (offline rule-based models) or "remote".
    std::string kind = "scripted";
    llm::RemoteConfig remote;
};

struct EmbeddingConfig {
    /// "toy" or "remote".
    std::string kind = "toy";
    std::size_t dimension = 256;
    llm::RemoteConfig remote;
};

struct HemsConfig {
    double dt_hours = 0.5;
    ThermalModel thermal;
    EvModel ev;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    double session_ttl_s = 3600.0;
    /// Empty disables snapshots.
    std::string snapshot_dir;
    unsigned threads = 8;
};

struct RunConfig {
    ProviderConfig provider;
    ProviderConfig user_provider;
    EmbeddingConfig embedding;
    HemsConfig hems;
    synth::TariffSpec tariff;
    agent::AgentConfig agent;
    int retry_budget = 3;
    eval::GridConfig evaluation;
    ServiceConfig service;
    std::string output_dir = "out";
    std::uint64_t scenario_seed = 1;
};

/// Builds a RunConfig from a JSON tree. Absent keys keep their defaults;
/// unknown keys and wrong types raise ConfigError naming the key path.
RunConfig parse_config(const nlohmann::json& tree);
/// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
RunConfig load_config(const std::filesystem::path& path);
/// Environment overrides for endpoints: HEMS_PROVIDER_URL,
/// HEMS_USER_PROVIDER_URL, HEMS_EMBEDDING_URL. Secrets are read from each
/// provider's api_key_env at request time.
void apply_environment(RunConfig& config);
/// The effective configuration as JSON (parse_config round-trips it).
nlohmann::json to_json(const RunConfig& config);

std::unique_ptr<llm::GenerationClient> make_agent_client(const ProviderConfig& config);
/// Empty factory for the scripted persona.
eval::ClientFactory make_user_factory(const ProviderConfig& config);
std::unique_ptr<llm::EmbeddingProvider> make_embedding(const EmbeddingConfig& config);

} // namespace hems::config
