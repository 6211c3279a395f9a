// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mbfuzz/message.hpp"
#include "mbfuzz/rng.hpp"

namespace mbfuzz {

// The 15 control packet types (3.1.1 types 1..14 plus AUTH).
enum class MqttType : std::uint8_t {
    Connect = 1,
    Connack = 2,
    Publish = 3,
    Puback = 4,
    Pubrec = 5,
    Pubrel = 6,
    Pubcomp = 7,
    Subscribe = 8,
    Suback = 9,
    Unsubscribe = 10,
    Unsuback = 11,
    Pingreq = 12,
    Pingresp = 13,
    Disconnect = 14,
    Auth = 15,
};

const char* to_string(MqttType type);
std::optional<MqttType> mqtt_type_from_state(std::string_view state); // "CONNECT" -> Connect

// Unset fields are filled with seeded random values at encode time.
// Defaults: protocol_level 4 (3.1.1); `flags` is the connect-flags byte for
// CONNECT and the fixed-header flag nibble for PUBLISH, ignored elsewhere.
struct MqttPacketParams {
    MqttType type = MqttType::Connect;
    std::optional<std::string> client_id;
    std::optional<std::string> topic;
    std::optional<std::string> payload_text;
    std::optional<int> qos; // 0, 1 or 2
    std::optional<std::uint16_t> packet_id;
    std::optional<std::uint8_t> protocol_level;
    std::optional<std::uint16_t> keep_alive;
    std::optional<std::uint8_t> flags;
};

struct MqttHeader {
    MqttType type;
    std::uint32_t remaining_length;
    std::size_t header_size; // bytes consumed by type byte + length field
};

inline constexpr std::uint32_t kMaxRemainingLength = 268'435'455;

// Variable-length remaining-length codec (1..4 bytes, 7 bits per byte).
void append_remaining_length(std::vector<std::uint8_t>& out, std::uint32_t value);
// Returns (value, bytes consumed). Throws CodecError on truncation or a
// continuation bit in the fourth byte.
std::pair<std::uint32_t, std::size_t> decode_remaining_length(std::span<const std::uint8_t> bytes);

// Structurally valid 3.1.1 control packet for any of the 15 types, including
// broker-to-client ones; sending those from the client side is a deliberate
// stimulus, not a mistake.
EncodedMessage encode_mqtt(const MqttPacketParams& params, Rng& rng);

MqttHeader decode_mqtt_header(std::span<const std::uint8_t> bytes);

} // namespace mbfuzz
