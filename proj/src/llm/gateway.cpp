// SPDX-License-Identifier: Apache-2.0
#include "hems/llm/gateway.hpp"

#include "hems/error.hpp"

namespace hems::llm {

std::string apply_stop_sequences(std::string_view text, const std::vector<std::string>& stop)
{
    std::size_t cut = text.size();
    for (const auto& s : stop) {
        if (s.empty())
            continue;
        const auto pos = text.find(s);
        if (pos != std::string_view::npos)
            cut = std::min(cut, pos);
    }
    return std::string(text.substr(0, cut));
}

std::string GenerationClient::generate(const GenerationRequest& request)
{
    if (request.prompt.empty())
        throw InvalidArgument("generation prompt must not be empty");
    return apply_stop_sequences(do_generate(request), request.stop);
}

ScriptedProvider::ScriptedProvider() : fingerprint_(&ScriptedProvider::task_fingerprint) {}

ScriptedProvider::ScriptedProvider(Fingerprint fingerprint) : fingerprint_(std::move(fingerprint)) {}

void ScriptedProvider::add(const std::string& key, std::vector<std::string> segments)
{
    std::lock_guard lock(mutex_);
    auto& queue = queues_[key];
    for (auto& s : segments)
        queue.push_back(std::move(s));
}

std::size_t ScriptedProvider::remaining(const std::string& key) const
{
    std::lock_guard lock(mutex_);
    const auto it = queues_.find(key);
    return it == queues_.end() ? 0 : it->second.size();
}

std::string ScriptedProvider::task_fingerprint(const GenerationRequest& request)
{
    static constexpr std::string_view kOpen = "<|im_start|>agent\n";
    static constexpr std::string_view kClose = "<|im_end|>";
    const std::string& prompt = request.prompt;
    const auto open = prompt.rfind(kOpen);
    if (open == std::string::npos)
        return prompt;
    const auto start = open + kOpen.size();
    const auto close = prompt.find(kClose, start);
    return prompt.substr(start, close == std::string::npos ? std::string::npos : close - start);
}

std::string ScriptedProvider::do_generate(const GenerationRequest& request)
{
    const std::string key = fingerprint_(request);
    std::lock_guard lock(mutex_);
    auto it = queues_.find(key);
    if (it == queues_.end() || it->second.empty())
        throw ProviderError("scripted provider has no segment left for '" + key + "'");
    std::string next = std::move(it->second.front());
    it->second.pop_front();
    return next;
}

} // namespace hems::llm
