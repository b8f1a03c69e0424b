// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/agent/tasks.hpp"
#include "hems/core/types.hpp"
#include "hems/llm/gateway.hpp"
#include "hems/time.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace hems::user {

enum class Difficulty { easy, medium, hard };

std::string_view to_string(Difficulty d);
/// "easy"/"E", "medium"/"M", "hard"/"H", case-insensitive.
Difficulty parse_difficulty(std::string_view text);
std::span<const Difficulty> all_difficulties();

/// The household a simulated user describes. Comfort temperatures are whole
/// degrees; the evening arrival and morning departure are whole hours.
struct PersonaGroundTruth {
    std::string city;
    int ev_count = 1;
    int t_min = 18;
    int t_max = 20;
    /// 24-hour clock, afternoon or evening.
    int arrival_hour = 19;
    /// 24-hour clock, morning.
    int leaving_hour = 9;
    Date date1;
    Date date2;

    /// Throws InvalidArgument naming the violated invariant.
    void validate() const;
    /// Canonical stored forms, keyed by parameter id.
    agent::StoredValues expected_values() const;
    HemsParameters parameters() const;

    nlohmann::json to_json() const;
    static PersonaGroundTruth from_json(const nlohmann::json& j);

    bool operator==(const PersonaGroundTruth&) const = default;
};

/// London household used in the example dialogue.
PersonaGroundTruth reference_persona();

/// Deterministic draw: city from the UK list, 1-3 vehicles, t_min 16-19,
/// t_max 1-4 degrees higher, arrival 16:00-21:00, departure 06:00-09:00,
/// a 2-7 day horizon inside 2024.
PersonaGroundTruth randomize_truth(std::uint64_t seed);

/// "October, 18th, 2024"
std::string verbose_date(Date date);

/// The mode's persona system prompt.
std::string render_user_prompt(Difficulty mode, const PersonaGroundTruth& truth);
/// Full chat prompt for one question, ending where the user's reply starts.
std::string render_user_chat(Difficulty mode, const PersonaGroundTruth& truth, std::string_view question);

class UserSimulator {
public:
    virtual ~UserSimulator() = default;
    virtual std::string answer(const std::string& question) = 0;
};

/// Parameter a question is about, by keyword; empty when unclear.
std::string classify_question(std::string_view question);

/// Canned answer in the mode's style for a parameter id.
std::string scripted_answer(Difficulty mode, const PersonaGroundTruth& truth, std::string_view parameter_id);

/// Concise reference answer used as the precision target.
inline std::string perfect_answer(const PersonaGroundTruth& truth, std::string_view parameter_id)
{
    return scripted_answer(Difficulty::easy, truth, parameter_id);
}

inline constexpr std::string_view kNotUnderstood = "I don't understand the question.";

/// Deterministic persona: classifies the question and replies with the
/// mode's canned sentence, or kNotUnderstood.
class ScriptedUser : public UserSimulator {
public:
    ScriptedUser(Difficulty mode, PersonaGroundTruth truth);
    std::string answer(const std::string& question) override;

private:
    Difficulty mode_;
    PersonaGroundTruth truth_;
};

/// Persona played by a language model through the user chat template.
class LlmUser : public UserSimulator {
public:
    LlmUser(llm::GenerationClient& client, Difficulty mode, PersonaGroundTruth truth, int max_tokens = 128,
            nlohmann::json options = nlohmann::json::object());
    std::string answer(const std::string& question) override;

private:
    llm::GenerationClient& client_;
    Difficulty mode_;
    PersonaGroundTruth truth_;
    int max_tokens_;
    nlohmann::json options_;
};

} // namespace hems::user
