// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hems {

/// Error classes; the CLI maps each onto a distinct exit code.
enum class ErrorCode {
    config,
    parse,
    invalid_argument,
    infeasible,
    provider,
    state,
    not_found,
    budget_exhausted,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorCode::config, message) {}
};

/// Malformed input text; line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line = 0)
        : Error(ErrorCode::parse, line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error(ErrorCode::invalid_argument, message) {}
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& message, int attempts = 0)
        : Error(ErrorCode::provider, message), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class StateError : public Error {
public:
    explicit StateError(const std::string& message) : Error(ErrorCode::state, message) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& message) : Error(ErrorCode::not_found, message) {}
};

} // namespace hems
