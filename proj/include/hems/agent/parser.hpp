// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hems::agent {

struct ToolCall {
    std::string action;
    nlohmann::json action_input;

    bool operator==(const ToolCall&) const = default;
};

struct FinalAnswer {
    std::string text;
};

struct ParseFailure {
    /// Short description of what was wrong with the blob.
    std::string error;
    /// The error-message observation fed back to the agent.
    std::string observation;
};

struct ParsedStep {
    std::variant<ToolCall, FinalAnswer, ParseFailure> result;
    /// The blob was a bare JSON object outside a markdown fence.
    bool lenient = false;
    /// The blob only parsed after replacing single-quoted strings.
    bool healed = false;

    const ToolCall* tool_call() const { return std::get_if<ToolCall>(&result); }
    const FinalAnswer* final_answer() const { return std::get_if<FinalAnswer>(&result); }
    const ParseFailure* failure() const { return std::get_if<ParseFailure>(&result); }
};

inline const std::vector<std::string>& default_tool_names()
{
    static const std::vector<std::string> names = {"ask_user", "store"};
    return names;
}

/// Text before the first "Observation:".
std::string_view truncate_at_observation(std::string_view text);

/// Classifies one generation as a tool call, a final answer or a parse
/// failure. Total: never throws on any input text.
ParsedStep parse_response(std::string_view generated, const std::vector<std::string>& tools = default_tool_names());

struct TranscriptStep {
    ParsedStep step;
    std::optional<std::string> observation;
};

/// Splits a complete Thought/Action/Observation transcript at its
/// "Observation:" lines and parses every generated segment.
std::vector<TranscriptStep> parse_transcript(std::string_view transcript,
                                             const std::vector<std::string>& tools = default_tool_names());

/// Rewrites single-quoted JSON strings with double quotes. Empty when the
/// text has no single-quoted strings to rewrite.
std::optional<std::string> heal_single_quotes(std::string_view text);

} // namespace hems::agent
