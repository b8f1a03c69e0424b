// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/llm/embedding.hpp"
#include "hems/llm/gateway.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hems::llm {

/// OpenAI-compatible HTTP endpoint (vLLM, llama.cpp server, TGI, ...).
struct RemoteConfig {
    /// "completions" sends the raw prompt; "chat" converts the
    /// <|im_start|> markup into a message list.
    std::string style = "completions";
    std::string base_url = "http://127.0.0.1:8000/v1";
    std::string model = "default";
    double timeout_s = 60.0;
    /// Extra attempts after the first on connection errors, 429 and 5xx.
    int max_retries = 2;
    double retry_backoff_s = 0.2;
    /// Environment variable holding a bearer token; unset means no header.
    std::string api_key_env = "HEMS_API_KEY";
    double temperature = 0.0;

    /// Throws ConfigError for unsupported styles or URLs.
    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

/// Splits <|im_start|>role ... <|im_end|> markup into messages. The
/// trailing open turn belongs to the generating side: it becomes
/// "assistant" (kept as a prefill when non-empty) and the other non-system
/// role becomes "user".
std::vector<ChatMessage> chat_messages_from_markup(const std::string& prompt);

class RemoteProvider : public GenerationClient {
public:
    explicit RemoteProvider(RemoteConfig config);

    /// Request body that would be sent for `request`.
    nlohmann::json request_body(const GenerationRequest& request) const;

protected:
    std::string do_generate(const GenerationRequest& request) override;

private:
    RemoteConfig config_;
};

/// POSTs to {base_url}/embeddings.
class RemoteEmbedding : public EmbeddingProvider {
public:
    explicit RemoteEmbedding(RemoteConfig config);
    EmbeddingVector embed(std::string_view text) override;

private:
    RemoteConfig config_;
};

/// POSTs `body` to base_url + path with retries; returns the parsed reply.
/// Throws ProviderError carrying the number of attempts made.
nlohmann::json post_json(const RemoteConfig& config, const std::string& path, const nlohmann::json& body);

} // namespace hems::llm
