// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hems::agent {

enum class AgentType { act, act_with_example, react_with_example };

/// "Act", "Act+example" or "ReAct+example".
std::string_view to_string(AgentType type);
/// Case-insensitive; also accepts "act_with_example" style names.
AgentType parse_agent_type(std::string_view text);
std::span<const AgentType> all_agent_types();

bool uses_example(AgentType type);
bool uses_thoughts(AgentType type);

/// Raw bytes of a file from assets/prompts, compiled into the binary.
std::string_view prompt_asset(std::string_view name);

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Replaces `$NAME` for every name in `declared`. Other `$WORDS` stay as
/// literal text. Throws InvalidArgument when a declared placeholder occurs
/// in `text` but has no binding.
std::string render_template(std::string_view text, const Bindings& bindings,
                            const std::vector<std::string_view>& declared);

struct ToolSpec {
    std::string name;
    std::string description;
    std::string input;
    std::string output;
};

/// ask_user and store.
std::vector<ToolSpec> default_tools();

/// One Python-dict line per tool.
std::string render_tool_descriptions(const std::vector<ToolSpec>& tools);
/// Comma separated tool names.
std::string render_tools_list(const std::vector<ToolSpec>& tools);

/// Format rules plus toolkit (the system part of the chat).
std::string render_prompt_template(AgentType type, const std::vector<ToolSpec>& tools);

/// Worked example shown to the agent types that get one.
std::string_view example_transcript(AgentType type);

/// Task used by the worked example.
inline constexpr std::string_view kTaskExample =
    "Find the user's number of solar panels and store it (number must be an integer).";

/// Full initial prompt for a task, ending where the agent's generation starts.
std::string render_agent_prompt(AgentType type, const std::vector<ToolSpec>& tools, std::string_view task);

/// Observation returned when a generated action cannot be parsed.
std::string render_error_message(std::string_view error);

} // namespace hems::agent
