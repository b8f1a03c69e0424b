// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/llm/gateway.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace hems::agent {

/// Offline stand-in for the language model behind the agent. Reads the
/// running transcript from the prompt, asks the user a fixed question for
/// the task, pulls the value out of the reply with keyword rules and
/// stores it. Emits Thought lines when the prompt's format asks for them.
class RuleBasedAgentModel : public llm::GenerationClient {
public:
    /// Parameter id the prompt's task text refers to, if any.
    static std::optional<std::string> detect_parameter(std::string_view task_text);
    /// Question asked for a parameter; later attempts get a rephrasing.
    static std::string question_for(std::string_view parameter_id, int attempt);
    /// Store input extracted from a user reply, or nullopt if the reply has
    /// no usable value.
    static std::optional<nlohmann::json> extract_value(std::string_view parameter_id, std::string_view reply);

protected:
    std::string do_generate(const llm::GenerationRequest& request) override;
};

} // namespace hems::agent
