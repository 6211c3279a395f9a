// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mbfuzz {

std::string hex_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> hex_decode(const std::string& text); // throws std::invalid_argument

// FNV-1a 64-bit, used as the case-store record checksum.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string iso8601_now();

// "%.4f" style formatting without locale surprises.
std::string format_fixed(double value, int decimals);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

} // namespace mbfuzz
