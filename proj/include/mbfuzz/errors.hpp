// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mbfuzz {

// Configuration problems abort before any traffic is sent (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed wire data or unencodable parameters.
class CodecError : public std::runtime_error {
public:
    explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

// Case store I/O and integrity failures (unknown id, checksum mismatch).
class StoreError : public std::runtime_error {
public:
    explicit StoreError(const std::string& what) : std::runtime_error(what) {}
};

// Advisor replies that stay invalid after the single reprompt.
class AdvisorError : public std::runtime_error {
public:
    explicit AdvisorError(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the chat backend when a call would exceed the campaign budget.
class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mbfuzz
