// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hems/time.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Pulls typed values out of free-form English answers. Used by the
/// offline rule-based agent and for canonical comparison of stored values.
namespace hems::extract {

/// Cities the simulated personas are drawn from.
const std::vector<std::string>& uk_cities();

/// Accepts YYYY/MM/DD, YYYY-MM-DD, DD-MM-YYYY, DD/MM/YYYY, DD.MM.YYYY and
/// spelled-out forms such as "October, 18th, 2024" or "16th of September".
/// A missing year falls back to `default_year`.
std::optional<Date> find_date(std::string_view text, int default_year = 2024);

/// HH:MM (24 h), "7 PM", "7:30 am", "9AM", "noon", "midnight".
std::optional<TimeOfDay> find_time(std::string_view text);

/// First standalone integer, digits first, then number words up to twenty.
std::optional<long long> find_integer(std::string_view text);

/// Every standalone decimal number in reading order.
std::vector<double> find_numbers(std::string_view text);

/// First known UK city, else the capitalised word after " in ".
std::optional<std::string> find_city(std::string_view text);

} // namespace hems::extract
