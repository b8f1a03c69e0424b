// SPDX-License-Identifier: Apache-2.0
#include "hems/agent/parser.hpp"

#include "hems/agent/prompts.hpp"

#include <algorithm>
#include <cctype>

namespace hems::agent {

namespace {

constexpr std::string_view kObservation = "Observation:";
constexpr std::string_view kFinalAnswer = "Final Answer:";
constexpr std::string_view kFence = "```";

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

ParsedStep failure(std::string error)
{
    ParsedStep step;
    std::string observation = render_error_message(error);
    step.result = ParseFailure{std::move(error), std::move(observation)};
    return step;
}

struct Blob {
    std::size_t start;
    std::string body;
};

// Pairs up ``` markers. A marker may carry a language tag on its line.
std::optional<std::vector<Blob>> fenced_blobs(std::string_view text)
{
    std::vector<std::size_t> marks;
    for (auto pos = text.find(kFence); pos != std::string_view::npos; pos = text.find(kFence, pos + kFence.size()))
        marks.push_back(pos);
    if (marks.size() % 2 != 0)
        return std::nullopt;
    std::vector<Blob> blobs;
    for (std::size_t i = 0; i < marks.size(); i += 2) {
        std::size_t body = marks[i] + kFence.size();
        const auto eol = text.find('\n', body);
        if (eol != std::string_view::npos && eol < marks[i + 1]) {
            const auto tag = text.substr(body, eol - body);
            if (std::all_of(tag.begin(), tag.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); }))
                body = eol + 1;
        }
        blobs.push_back({marks[i], std::string(text.substr(body, marks[i + 1] - body))});
    }
    return blobs;
}

// Top-level {...} regions outside string literals.
std::vector<Blob> bare_objects(std::string_view text)
{
    std::vector<Blob> out;
    int depth = 0;
    char quote = 0;
    bool escaped = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quote) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == quote)
                quote = 0;
            continue;
        }
        if (depth > 0 && (c == '"' || c == '\'')) {
            quote = c;
        } else if (c == '{') {
            if (depth++ == 0)
                start = i;
        } else if (c == '}' && depth > 0) {
            if (--depth == 0)
                out.push_back({start, std::string(text.substr(start, i - start + 1))});
        }
    }
    return out;
}

std::string describe_type(const nlohmann::json& value)
{
    if (value.is_boolean())
        return "bool";
    if (value.is_null())
        return "None";
    if (value.is_object())
        return "dict";
    return value.type_name();
}

ParsedStep interpret_blob(const std::string& raw, const std::vector<std::string>& tools)
{
    const std::string body = trim(raw);
    if (body.empty())
        return failure("the JSON blob is empty");

    ParsedStep step;
    nlohmann::json blob;
    try {
        blob = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        std::string message = e.what();
        if (const auto close = message.find("] "); message.rfind("[json.exception", 0) == 0 && close != std::string::npos)
            message = message.substr(close + 2);
        const auto healed = heal_single_quotes(body);
        if (!healed)
            return failure("invalid JSON: " + message);
        try {
            blob = nlohmann::json::parse(*healed);
            step.healed = true;
        } catch (const nlohmann::json::parse_error&) {
            return failure("invalid JSON: " + message);
        }
    }

    if (blob.is_array())
        return failure("the JSON blob is a list of " + std::to_string(blob.size()) +
                       " items; it must contain a SINGLE action");
    if (!blob.is_object())
        return failure("the JSON blob must be an object with `action` and `action_input` keys");
    const auto action = blob.find("action");
    if (action == blob.end())
        return failure("KeyError: 'action'");
    if (blob.find("action_input") == blob.end())
        return failure("KeyError: 'action_input'");
    if (!action->is_string())
        return failure("`action` must be a string naming a tool, got " + describe_type(*action));
    const std::string name = action->get<std::string>();
    if (std::find(tools.begin(), tools.end(), name) == tools.end()) {
        std::string valid;
        for (const auto& t : tools)
            valid += (valid.empty() ? "" : ", ") + t;
        return failure("unknown action '" + name + "'; the valid actions are: " + valid);
    }
    const auto& input = blob["action_input"];
    if (!(input.is_string() || input.is_number() || input.is_array()))
        return failure("`action_input` has invalid type " + describe_type(input) + "; expected str, int, list or float");
    step.result = ToolCall{name, input};
    return step;
}

} // namespace

std::string_view truncate_at_observation(std::string_view text)
{
    const auto pos = text.find(kObservation);
    return pos == std::string_view::npos ? text : text.substr(0, pos);
}

std::optional<std::string> heal_single_quotes(std::string_view text)
{
    std::string out;
    bool changed = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '"') {
            // Copy a double-quoted string verbatim.
            out += c;
            ++i;
            while (i < text.size() && text[i] != '"') {
                if (text[i] == '\\' && i + 1 < text.size())
                    out += text[i++];
                out += text[i++];
            }
            if (i < text.size())
                out += text[i++];
            continue;
        }
        if (c != '\'') {
            out += c;
            ++i;
            continue;
        }
        // A single-quoted string ends at a quote followed by , } ] : or the end.
        std::size_t j = i + 1;
        std::string value;
        bool closed = false;
        while (j < text.size()) {
            if (text[j] == '\\' && j + 1 < text.size() && text[j + 1] == '\'') {
                value += '\'';
                j += 2;
                continue;
            }
            if (text[j] == '\'') {
                std::size_t k = j + 1;
                while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r' || text[k] == '\n'))
                    ++k;
                if (k == text.size() || text[k] == ',' || text[k] == '}' || text[k] == ']' || text[k] == ':') {
                    closed = true;
                    break;
                }
            }
            if (text[j] == '"')
                value += '\\';
            value += text[j++];
        }
        if (!closed)
            return std::nullopt;
        out += '"' + value + '"';
        changed = true;
        i = j + 1;
    }
    if (!changed)
        return std::nullopt;
    return out;
}

ParsedStep parse_response(std::string_view generated, const std::vector<std::string>& tools)
{
    const std::string_view text = truncate_at_observation(generated);
    const auto final_pos = text.find(kFinalAnswer);
    auto final_answer = [&] {
        ParsedStep step;
        step.result = FinalAnswer{trim(text.substr(final_pos + kFinalAnswer.size()))};
        return step;
    };

    const auto blobs = fenced_blobs(text);
    if (!blobs) {
        if (final_pos != std::string_view::npos && final_pos < text.find(kFence))
            return final_answer();
        return failure("unterminated markdown code block: the JSON blob must be enclosed in ``` fences");
    }
    if (blobs->empty()) {
        if (final_pos != std::string_view::npos)
            return final_answer();
        const auto objects = bare_objects(text);
        if (objects.empty())
            return failure("could not find a JSON blob: the action must be a markdown-formatted $JSON_BLOB");
        if (objects.size() > 1)
            return failure("found " + std::to_string(objects.size()) + " JSON blobs; only a SINGLE action is allowed");
        auto step = interpret_blob(objects.front().body, tools);
        step.lenient = true;
        return step;
    }
    if (final_pos != std::string_view::npos && final_pos < blobs->front().start)
        return final_answer();
    if (blobs->size() > 1)
        return failure("found " + std::to_string(blobs->size()) + " JSON blobs; only a SINGLE action is allowed");
    return interpret_blob(blobs->front().body, tools);
}

std::vector<TranscriptStep> parse_transcript(std::string_view transcript, const std::vector<std::string>& tools)
{
    std::vector<TranscriptStep> steps;
    std::size_t segment_start = 0;
    std::size_t line_start = 0;
    while (line_start <= transcript.size()) {
        auto line_end = transcript.find('\n', line_start);
        if (line_end == std::string_view::npos)
            line_end = transcript.size();
        const auto line = transcript.substr(line_start, line_end - line_start);
        if (line.rfind(kObservation, 0) == 0) {
            TranscriptStep step{parse_response(transcript.substr(segment_start, line_start - segment_start), tools),
                                trim(line.substr(kObservation.size()))};
            steps.push_back(std::move(step));
            segment_start = line_end + 1;
        }
        if (line_end == transcript.size())
            break;
        line_start = line_end + 1;
    }
    if (segment_start < transcript.size() && !trim(transcript.substr(segment_start)).empty())
        steps.push_back({parse_response(transcript.substr(segment_start), tools), std::nullopt});
    return steps;
}

} // namespace hems::agent
