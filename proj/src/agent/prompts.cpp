// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/prompts.hpp"

#include "hems/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace hems::agent {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kPromptAssets[];
extern const std::size_t kPromptAssetCount;
} // namespace detail

namespace {

constexpr std::array<AgentType, 3> kAgentTypes = {AgentType::act, AgentType::act_with_example,
                                                  AgentType::react_with_example};

std::string lowercase(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool placeholder_char(char c)
{
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::string python_repr(std::string_view text)
{
    const bool has_single = text.find('\'') != std::string_view::npos;
    const bool has_double = text.find('"') != std::string_view::npos;
    const char quote = has_single && !has_double ? '"' : '\'';
    std::string out(1, quote);
    for (char c : text) {
        if (c == '\\' || c == quote)
            out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    out += quote;
    return out;
}

} // namespace

std::string_view to_string(AgentType type)
{
    switch (type) {
    case AgentType::act: return "Act";
    case AgentType::act_with_example: return "Act+example";
    case AgentType::react_with_example: return "ReAct+example";
    }
    return "unknown";
}

AgentType parse_agent_type(std::string_view text)
{
    const std::string key = lowercase(text);
    if (key == "act")
        return AgentType::act;
    if (key == "act+example" || key == "act_with_example" || key == "actwithexample")
        return AgentType::act_with_example;
    if (key == "react+example" || key == "react_with_example" || key == "reactwithexample")
        return AgentType::react_with_example;
    throw InvalidArgument("unknown agent type '" + std::string(text) + "' (expected Act, Act+example or ReAct+example)");
}

std::span<const AgentType> all_agent_types() { return kAgentTypes; }

bool uses_example(AgentType type) { return type != AgentType::act; }
bool uses_thoughts(AgentType type) { return type == AgentType::react_with_example; }

std::string_view prompt_asset(std::string_view name)
{
    for (std::size_t i = 0; i < detail::kPromptAssetCount; ++i)
        if (detail::kPromptAssets[i].first == name)
            return detail::kPromptAssets[i].second;
    throw NotFound("no prompt asset named '" + std::string(name) + "'");
}

std::string render_template(std::string_view text, const Bindings& bindings,
                            const std::vector<std::string_view>& declared)
{
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '$') {
            out += text[i++];
            continue;
        }
        std::size_t end = i + 1;
        while (end < text.size() && placeholder_char(text[end]))
            ++end;
        const std::string_view name = text.substr(i + 1, end - i - 1);
        if (name.empty() || std::find(declared.begin(), declared.end(), name) == declared.end()) {
            out += text[i++];
            continue;
        }
        const auto found = bindings.find(name);
        if (found == bindings.end())
            throw InvalidArgument("missing binding for placeholder $" + std::string(name));
        out += found->second;
        i = end;
    }
    return out;
}

std::vector<ToolSpec> default_tools()
{
    return {
        {"ask_user", "Return the user's answer to a query", "query: A question to a user", "The user's answer"},
        {"store", "Store a value by assigning it to an argument", "value: The value to store.", "A validation message"},
    };
}

std::string render_tool_descriptions(const std::vector<ToolSpec>& tools)
{
    std::string out;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        if (i)
            out += '\n';
        const auto& t = tools[i];
        out += "{'action': " + python_repr(t.name) + ", 'action_description': " + python_repr(t.description) +
               ", 'action_input': " + python_repr(t.input) + ", 'action_output': " + python_repr(t.output) + "}";
    }
    return out;
}

std::string render_tools_list(const std::vector<ToolSpec>& tools)
{
    std::string out;
    for (std::size_t i = 0; i < tools.size(); ++i) {
        if (i)
            out += ", ";
        out += tools[i].name;
    }
    return out;
}

std::string render_prompt_template(AgentType type, const std::vector<ToolSpec>& tools)
{
    const auto text = prompt_asset(uses_thoughts(type) ? "agent_react.txt" : "agent_act.txt");
    return render_template(text,
                           {{"TOOLS_DESCRIPTION", render_tool_descriptions(tools)},
                            {"TOOLS_LIST", render_tools_list(tools)}},
                           {"TOOLS_DESCRIPTION", "TOOLS_LIST"});
}

std::string_view example_transcript(AgentType type)
{
    return prompt_asset(uses_thoughts(type) ? "example_react.txt" : "example_act.txt");
}

std::string render_agent_prompt(AgentType type, const std::vector<ToolSpec>& tools, std::string_view task)
{
    Bindings bindings = {{"PROMPT_TEMPLATE", render_prompt_template(type, tools)}, {"TASK", std::string(task)}};
    if (!uses_example(type))
        return render_template(prompt_asset("agent_chat_no_example.txt"), bindings, {"PROMPT_TEMPLATE", "TASK"});
    bindings.emplace("TASK_EXAMPLE", std::string(kTaskExample));
    bindings.emplace("EXAMPLE", std::string(example_transcript(type)));
    return render_template(prompt_asset("agent_chat_example.txt"), bindings,
                           {"PROMPT_TEMPLATE", "TASK_EXAMPLE", "EXAMPLE", "TASK"});
}

std::string render_error_message(std::string_view error)
{
    return render_template(prompt_asset("error_message.txt"), {{"ERROR", std::string(error)}}, {"ERROR"});
}

} // namespace hems::agent
