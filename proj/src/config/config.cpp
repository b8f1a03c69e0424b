// SPDX-License-Identifier: Apache-2.0
#include "hems/config/config.hpp"

#include "hems/agent/rule_agent.hpp"
#include "hems/error.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace hems::config {

namespace {

std::string type_name(const nlohmann::json& j) { return j.type_name(); }

// Walks one JSON object, remembering which keys were consumed.
class Section {
public:
    Section(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object())
            throw ConfigError(where() + "must be an object, got " + type_name(node_));
    }

    const std::string& path() const { return path_; }

    std::string key_path(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

    const nlohmann::json* find(std::string_view key)
    {
        seen_.insert(std::string(key));
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void number(std::string_view key, double& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_number())
                throw ConfigError(key_path(key) + ": expected a number, got " + type_name(*v));
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(std::string_view key, Int& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer())
                throw ConfigError(key_path(key) + ": expected an integer, got " + type_name(*v));
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->get<long long>() < 0)
                    throw ConfigError(key_path(key) + ": must not be negative");
            }
            out = v->get<Int>();
        }
    }

    void boolean(std::string_view key, bool& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_boolean())
                throw ConfigError(key_path(key) + ": expected true or false, got " + type_name(*v));
            out = v->get<bool>();
        }
    }

    void string(std::string_view key, std::string& out)
    {
        if (const auto* v = find(key)) {
            if (!v->is_string())
                throw ConfigError(key_path(key) + ": expected a string, got " + type_name(*v));
            out = v->get<std::string>();
        }
    }

    void time(std::string_view key, TimeOfDay& out)
    {
        std::string text;
        string(key, text);
        if (text.empty())
            return;
        const auto t = parse_time_of_day(text);
        if (!t)
            throw ConfigError(key_path(key) + ": expected HH:MM, got '" + text + "'");
        out = *t;
    }

    template <typename Fn>
    void array(std::string_view key, Fn&& each)
    {
        if (const auto* v = find(key)) {
            if (!v->is_array())
                throw ConfigError(key_path(key) + ": expected an array, got " + type_name(*v));
            for (std::size_t i = 0; i < v->size(); ++i)
                each((*v)[i], key_path(key) + "[" + std::to_string(i) + "]");
        }
    }

    template <typename Fn>
    void object(std::string_view key, Fn&& fill)
    {
        if (const auto* v = find(key)) {
            Section child(*v, key_path(key));
            fill(child);
            child.finish();
        }
    }

    void finish() const
    {
        for (const auto& [key, value] : node_.items())
            if (!seen_.count(key))
                throw ConfigError(key_path(key) + ": unknown key");
    }

private:
    std::string where() const { return path_.empty() ? "configuration " : path_ + ": "; }

    const nlohmann::json& node_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

void read_remote(Section& s, llm::RemoteConfig& r)
{
    s.string("style", r.style);
    s.string("base_url", r.base_url);
    s.string("model", r.model);
    s.number("timeout_s", r.timeout_s);
    s.integer("max_retries", r.max_retries);
    s.number("retry_backoff_s", r.retry_backoff_s);
    s.string("api_key_env", r.api_key_env);
    s.number("temperature", r.temperature);
}

void read_provider(Section& s, ProviderConfig& p)
{
    s.string("kind", p.kind);
    read_remote(s, p.remote);
    if (p.kind != "scripted" && p.kind != "remote")
        throw ConfigError(s.key_path("kind") + ": expected 'scripted' or 'remote', got '" + p.kind + "'");
    if (p.kind == "remote") {
        try {
            p.remote.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(s.path() + ": " + e.what());
        }
    }
}

nlohmann::json remote_json(const std::string& kind, const llm::RemoteConfig& r)
{
    return {{"kind", kind},
            {"style", r.style},
            {"base_url", r.base_url},
            {"model", r.model},
            {"timeout_s", r.timeout_s},
            {"max_retries", r.max_retries},
            {"retry_backoff_s", r.retry_backoff_s},
            {"api_key_env", r.api_key_env},
            {"temperature", r.temperature}};
}

} // namespace

RunConfig parse_config(const nlohmann::json& tree)
{
    RunConfig c;
    Section root(tree, "");
    root.object("provider", [&](Section& s) { read_provider(s, c.provider); });
    root.object("user_provider", [&](Section& s) { read_provider(s, c.user_provider); });
    root.object("embedding", [&](Section& s) {
        s.string("kind", c.embedding.kind);
        s.integer("dimension", c.embedding.dimension);
        read_remote(s, c.embedding.remote);
        if (c.embedding.kind != "toy" && c.embedding.kind != "remote")
            throw ConfigError("embedding.kind: expected 'toy' or 'remote', got '" + c.embedding.kind + "'");
        if (c.embedding.dimension == 0)
            throw ConfigError("embedding.dimension: must be positive");
    });
    root.object("hems", [&](Section& s) {
        double c_th = c.hems.thermal.c_th(), r_th = c.hems.thermal.r_th(), eta = c.hems.thermal.eta();
        double rating = c.hems.thermal.heater_rating_kw();
        double initial = -1000.0;
        s.number("dt_hours", c.hems.dt_hours);
        s.number("c_th", c_th);
        s.number("r_th", r_th);
        s.number("eta", eta);
        s.number("heater_rating_kw", rating);
        s.number("initial_temperature", initial);
        s.number("battery_capacity_per_vehicle", c.hems.ev.battery_capacity_per_vehicle);
        s.number("e_init_fraction", c.hems.ev.e_init_fraction);
        s.number("p_charge_max_per_vehicle", c.hems.ev.p_charge_max_per_vehicle);
        try {
            c.hems.thermal = ThermalModel(c_th, r_th, eta, rating);
            if (initial != -1000.0)
                c.hems.thermal.initial_temperature = initial;
            c.hems.ev.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("hems: ") + e.what());
        }
        if (!(c.hems.dt_hours > 0.0) || c.hems.dt_hours > 24.0)
            throw ConfigError("hems.dt_hours: must be in (0, 24]");
    });
    root.object("tariff", [&](Section& s) {
        s.time("offpeak_start", c.tariff.offpeak_start);
        s.time("offpeak_end", c.tariff.offpeak_end);
        s.number("offpeak_price", c.tariff.offpeak_price);
        s.number("peak_price", c.tariff.peak_price);
        s.number("feedin_price", c.tariff.feedin_price);
        try {
            c.tariff.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("tariff: ") + e.what());
        }
    });
    root.object("agent", [&](Section& s) {
        std::string type(agent::to_string(c.agent.type));
        s.string("type", type);
        s.integer("max_generations", c.agent.max_generations);
        s.integer("max_consecutive_parse_errors", c.agent.max_consecutive_parse_errors);
        s.integer("max_tokens", c.agent.max_tokens);
        s.integer("retry_budget", c.retry_budget);
        try {
            c.agent.type = agent::parse_agent_type(type);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("agent.type: ") + e.what());
        }
        if (c.agent.max_generations < 1)
            throw ConfigError("agent.max_generations: must be at least 1");
        if (c.retry_budget < 0)
            throw ConfigError("agent.retry_budget: must not be negative");
    });
    root.object("evaluation", [&](Section& s) {
        auto& e = c.evaluation;
        std::vector<agent::AgentType> types;
        s.array("agent_types", [&](const nlohmann::json& v, const std::string& path) {
            try {
                types.push_back(agent::parse_agent_type(v.get<std::string>()));
            } catch (const std::exception& ex) {
                throw ConfigError(path + ": " + ex.what());
            }
        });
        std::vector<user::Difficulty> difficulties;
        s.array("difficulties", [&](const nlohmann::json& v, const std::string& path) {
            try {
                difficulties.push_back(user::parse_difficulty(v.get<std::string>()));
            } catch (const std::exception& ex) {
                throw ConfigError(path + ": " + ex.what());
            }
        });
        if (!types.empty())
            e.agent_types = types;
        if (!difficulties.empty())
            e.difficulties = difficulties;
        s.integer("trials", e.trials);
        s.integer("seed", e.seed);
        s.integer("workers", e.workers);
        s.boolean("raw_strict", e.raw_strict);
        if (e.trials < 1)
            throw ConfigError("evaluation.trials: must be at least 1");
    });
    root.object("service", [&](Section& s) {
        s.string("host", c.service.host);
        s.integer("port", c.service.port);
        s.number("session_ttl_s", c.service.session_ttl_s);
        s.string("snapshot_dir", c.service.snapshot_dir);
        s.integer("threads", c.service.threads);
        if (c.service.port < 0 || c.service.port > 65535)
            throw ConfigError("service.port: must be within 0-65535");
    });
    root.string("output_dir", c.output_dir);
    root.integer("scenario_seed", c.scenario_seed);
    root.finish();

    c.evaluation.agent = c.agent;
    c.evaluation.retry_budget = c.retry_budget;
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file " + path.string());
    nlohmann::json tree;
    try {
        tree = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(tree);
}

void apply_environment(RunConfig& config)
{
    if (const char* v = std::getenv("HEMS_PROVIDER_URL"); v && *v)
        config.provider.remote.base_url = v;
    if (const char* v = std::getenv("HEMS_USER_PROVIDER_URL"); v && *v)
        config.user_provider.remote.base_url = v;
    if (const char* v = std::getenv("HEMS_EMBEDDING_URL"); v && *v)
        config.embedding.remote.base_url = v;
}

nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json embedding = remote_json(c.embedding.kind, c.embedding.remote);
    embedding["dimension"] = c.embedding.dimension;
    nlohmann::json hems = {{"dt_hours", c.hems.dt_hours},
                           {"c_th", c.hems.thermal.c_th()},
                           {"r_th", c.hems.thermal.r_th()},
                           {"eta", c.hems.thermal.eta()},
                           {"heater_rating_kw", c.hems.thermal.heater_rating_kw()},
                           {"battery_capacity_per_vehicle", c.hems.ev.battery_capacity_per_vehicle},
                           {"e_init_fraction", c.hems.ev.e_init_fraction},
                           {"p_charge_max_per_vehicle", c.hems.ev.p_charge_max_per_vehicle}};
    if (c.hems.thermal.initial_temperature)
        hems["initial_temperature"] = *c.hems.thermal.initial_temperature;
    nlohmann::json types = nlohmann::json::array(), difficulties = nlohmann::json::array();
    for (auto t : c.evaluation.agent_types)
        types.push_back(agent::to_string(t));
    for (auto d : c.evaluation.difficulties)
        difficulties.push_back(user::to_string(d));
    return {{"provider", remote_json(c.provider.kind, c.provider.remote)},
            {"user_provider", remote_json(c.user_provider.kind, c.user_provider.remote)},
            {"embedding", embedding},
            {"hems", hems},
            {"tariff",
             {{"offpeak_start", c.tariff.offpeak_start.canonical()},
              {"offpeak_end", c.tariff.offpeak_end.canonical()},
              {"offpeak_price", c.tariff.offpeak_price},
              {"peak_price", c.tariff.peak_price},
              {"feedin_price", c.tariff.feedin_price}}},
            {"agent",
             {{"type", agent::to_string(c.agent.type)},
              {"max_generations", c.agent.max_generations},
              {"max_consecutive_parse_errors", c.agent.max_consecutive_parse_errors},
              {"max_tokens", c.agent.max_tokens},
              {"retry_budget", c.retry_budget}}},
            {"evaluation",
             {{"agent_types", types},
              {"difficulties", difficulties},
              {"trials", c.evaluation.trials},
              {"seed", c.evaluation.seed},
              {"workers", c.evaluation.workers},
              {"raw_strict", c.evaluation.raw_strict}}},
            {"service",
             {{"host", c.service.host},
              {"port", c.service.port},
              {"session_ttl_s", c.service.session_ttl_s},
              {"snapshot_dir", c.service.snapshot_dir},
              {"threads", c.service.threads}}},
            {"output_dir", c.output_dir},
            {"scenario_seed", c.scenario_seed}};
}

std::unique_ptr<llm::GenerationClient> make_agent_client(const ProviderConfig& config)
{
    if (config.kind == "remote")
        return std::make_unique<llm::RemoteProvider>(config.remote);
    return std::make_unique<agent::RuleBasedAgentModel>();
}

eval::ClientFactory make_user_factory(const ProviderConfig& config)
{
    if (config.kind != "remote")
        return {};
    return [remote = config.remote] { return std::make_unique<llm::RemoteProvider>(remote); };
}

std::unique_ptr<llm::EmbeddingProvider> make_embedding(const EmbeddingConfig& config)
{
    if (config.kind == "remote")
        return std::make_unique<llm::RemoteEmbedding>(config.remote);
    return std::make_unique<llm::ToyEmbedding>(config.dimension);
}

} // namespace hems::config
