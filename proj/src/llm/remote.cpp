// SPDX-License-Identifier: Apache-2.0
#include "hems/llm/remote.hpp"

#include "hems/error.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace hems::llm {

namespace {

struct Endpoint {
    std::string origin;
    std::string prefix;
};

Endpoint split_url(const std::string& url)
{
    const auto scheme = url.find("://");
    if (scheme == std::string::npos)
        throw ConfigError("base_url must start with http://, got '" + url + "'");
    const auto path = url.find('/', scheme + 3);
    Endpoint e{url.substr(0, path), path == std::string::npos ? std::string() : url.substr(path)};
    while (!e.prefix.empty() && e.prefix.back() == '/')
        e.prefix.pop_back();
    return e;
}

} // namespace

void RemoteConfig::validate() const
{
    if (style != "completions" && style != "chat")
        throw ConfigError("provider style must be 'completions' or 'chat', got '" + style + "'");
    if (base_url.rfind("http://", 0) != 0)
        throw ConfigError("base_url must use http://, got '" + base_url + "'");
    if (!(timeout_s > 0.0))
        throw ConfigError("timeout_s must be positive");
    if (max_retries < 0)
        throw ConfigError("max_retries must not be negative");
    if (retry_backoff_s < 0.0)
        throw ConfigError("retry_backoff_s must not be negative");
}

std::vector<ChatMessage> chat_messages_from_markup(const std::string& prompt)
{
    static constexpr std::string_view kStart = "<|im_start|>";
    static constexpr std::string_view kEnd = "<|im_end|>";
    struct Turn {
        std::string role;
        std::string content;
        bool open;
    };
    std::vector<Turn> turns;
    std::size_t pos = prompt.find(kStart);
    if (pos == std::string::npos)
        return {{"user", prompt}};
    while (pos != std::string::npos) {
        const auto role_begin = pos + kStart.size();
        const auto newline = prompt.find('\n', role_begin);
        const auto role_end = newline == std::string::npos ? prompt.size() : newline;
        const auto body = newline == std::string::npos ? prompt.size() : newline + 1;
        const auto end = prompt.find(kEnd, body);
        const auto next = prompt.find(kStart, body);
        if (end != std::string::npos && (next == std::string::npos || end < next)) {
            turns.push_back({prompt.substr(role_begin, role_end - role_begin), prompt.substr(body, end - body), false});
        } else {
            const auto stop = next == std::string::npos ? prompt.size() : next;
            turns.push_back({prompt.substr(role_begin, role_end - role_begin), prompt.substr(body, stop - body), true});
        }
        pos = next;
    }
    const std::string generating = turns.back().open ? turns.back().role : std::string();
    std::vector<ChatMessage> out;
    for (const auto& t : turns) {
        if (t.open && t.content.empty())
            continue;
        std::string role = t.role == "system" ? "system" : (t.role == generating ? "assistant" : "user");
        out.push_back({std::move(role), t.content});
    }
    return out;
}

nlohmann::json post_json(const RemoteConfig& config, const std::string& path, const nlohmann::json& body)
{
    const auto endpoint = split_url(config.base_url);
    httplib::Client client(endpoint.origin);
    const auto timeout = std::chrono::duration<double>(config.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!config.api_key_env.empty())
        if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

    const std::string url = endpoint.prefix + path;
    const std::string payload = body.dump();
    const int attempts = 1 + config.max_retries;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) {
            const double wait = config.retry_backoff_s * std::pow(2.0, attempt - 2);
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
        auto res = client.Post(url, headers, payload, "application/json");
        if (!res) {
            last_error = "cannot reach " + endpoint.origin + url + ": " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status) + " from " + endpoint.origin + url;
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw ProviderError("HTTP " + std::to_string(res->status) + " from " + endpoint.origin + url + ": " +
                                    res->body.substr(0, 200),
                                attempt);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError("malformed JSON reply from " + endpoint.origin + url + ": " + e.what(), attempt);
        }
    }
    throw ProviderError(last_error + " (after " + std::to_string(attempts) + " attempts)", attempts);
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) { config_.validate(); }

nlohmann::json RemoteProvider::request_body(const GenerationRequest& request) const
{
    nlohmann::json body = {{"model", config_.model},
                           {"max_tokens", request.max_tokens},
                           {"temperature", config_.temperature}};
    if (!request.stop.empty())
        body["stop"] = request.stop;
    if (config_.style == "chat") {
        nlohmann::json messages = nlohmann::json::array();
        for (const auto& m : chat_messages_from_markup(request.prompt))
            messages.push_back({{"role", m.role}, {"content", m.content}});
        body["messages"] = std::move(messages);
    } else {
        body["prompt"] = request.prompt;
    }
    if (request.options.is_object())
        for (const auto& [key, value] : request.options.items())
            body[key] = value;
    return body;
}

std::string RemoteProvider::do_generate(const GenerationRequest& request)
{
    const bool chat = config_.style == "chat";
    const auto reply = post_json(config_, chat ? "/chat/completions" : "/completions", request_body(request));
    try {
        const auto& choice = reply.at("choices").at(0);
        return chat ? choice.at("message").at("content").get<std::string>() : choice.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected completion reply: ") + e.what(), 1);
    }
}

RemoteEmbedding::RemoteEmbedding(RemoteConfig config) : config_(std::move(config)) { config_.validate(); }

EmbeddingVector RemoteEmbedding::embed(std::string_view text)
{
    const auto reply = post_json(config_, "/embeddings", {{"model", config_.model}, {"input", std::string(text)}});
    try {
        return reply.at("data").at(0).at("embedding").get<EmbeddingVector>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("unexpected embedding reply: ") + e.what(), 1);
    }
}

} // namespace hems::llm
