// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace hems::llm {

struct GenerationRequest {
    std::string prompt;
    std::vector<std::string> stop;
    int max_tokens = 512;
    /// Passed through to remote backends untouched (temperature, top_p, ...).
    nlohmann::json options = nlohmann::json::object();
};

/// Cuts `text` before the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string_view text, const std::vector<std::string>& stop);

/// Text generation backend. Stop sequences are enforced here, after the
/// backend returns, so every provider truncates identically.
class GenerationClient {
public:
    virtual ~GenerationClient() = default;

    /// Throws InvalidArgument for an empty prompt and ProviderError for
    /// backend failures.
    std::string generate(const GenerationRequest& request);

protected:
    virtual std::string do_generate(const GenerationRequest& request) = 0;
};

/// Replays canned segments. Each request is keyed by a fingerprint of its
/// prompt; every key owns a queue consumed in order.
class ScriptedProvider : public GenerationClient {
public:
    using Fingerprint = std::function<std::string(const GenerationRequest&)>;

    /// Defaults to `task_fingerprint`.
    ScriptedProvider();
    explicit ScriptedProvider(Fingerprint fingerprint);

    void add(const std::string& key, std::vector<std::string> segments);
    /// Segments still queued under `key`.
    std::size_t remaining(const std::string& key) const;

    /// Content of the last `<|im_start|>agent` turn of a chat prompt, or the
    /// whole prompt when there is none.
    static std::string task_fingerprint(const GenerationRequest& request);

protected:
    std::string do_generate(const GenerationRequest& request) override;

private:
    Fingerprint fingerprint_;
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> queues_;
};

/// Adapts a plain function; handy for tests and fault injection.
class CallbackProvider : public GenerationClient {
public:
    using Callback = std::function<std::string(const GenerationRequest&)>;
    explicit CallbackProvider(Callback callback) : callback_(std::move(callback)) {}

protected:
    std::string do_generate(const GenerationRequest& request) override { return callback_(request); }

private:
    Callback callback_;
};

} // namespace hems::llm
