// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/core/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hems::agent {

enum class ValueFormat { datetime, integer, string, time, floating };

std::string_view to_string(ValueFormat format);

/// One household value the agent has to retrieve and store.
struct ParameterTask {
    std::string parameter_id;
    std::string task_text;
    ValueFormat format = ValueFormat::string;
    /// Canonical textual form, e.g. YYYY/MM/DD.
    std::string format_pattern;
};

/// The eight tasks in dialogue order: city, start and end dates, vehicle
/// count, arrival and departure times, minimum and maximum temperature.
const std::vector<ParameterTask>& default_tasks();
const ParameterTask& find_task(std::string_view parameter_id);

inline constexpr std::string_view kStoreSuccess = "The value was correctly assigned. The task is done";

struct StoreOutcome {
    bool ok = false;
    std::string canonical;
    std::string observation;
};

/// Coerces a store input to the task's canonical form. A mismatch is a
/// normal outcome with a corrective observation, never an exception.
StoreOutcome store_validate(const ParameterTask& task, const nlohmann::json& raw);

/// parameter_id -> canonical value
using StoredValues = std::map<std::string, std::string>;

/// Builds and validates the optimizer input. Throws InvalidArgument naming
/// missing parameters or the first violated invariant.
HemsParameters assemble_parameters(const StoredValues& values);

/// Canonical values of a parameter set, keyed like StoredValues.
StoredValues canonical_values(const HemsParameters& params);

} // namespace hems::agent
