// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/mqtt.hpp"

#include <array>
#include <map>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

const char* to_string(MqttType type) {
    switch (type) {
    case MqttType::Connect: return "CONNECT";
    case MqttType::Connack: return "CONNACK";
    case MqttType::Publish: return "PUBLISH";
    case MqttType::Puback: return "PUBACK";
    case MqttType::Pubrec: return "PUBREC";
    case MqttType::Pubrel: return "PUBREL";
    case MqttType::Pubcomp: return "PUBCOMP";
    case MqttType::Subscribe: return "SUBSCRIBE";
    case MqttType::Suback: return "SUBACK";
    case MqttType::Unsubscribe: return "UNSUBSCRIBE";
    case MqttType::Unsuback: return "UNSUBACK";
    case MqttType::Pingreq: return "PINGREQ";
    case MqttType::Pingresp: return "PINGRESP";
    case MqttType::Disconnect: return "DISCONNECT";
    case MqttType::Auth: return "AUTH";
    }
    return "?";
}

std::optional<MqttType> mqtt_type_from_state(std::string_view state) {
    static const std::map<std::string_view, MqttType> table = {
        {"CONNECT", MqttType::Connect},         {"CONNACK", MqttType::Connack},
        {"PUBLISH", MqttType::Publish},         {"PUBACK", MqttType::Puback},
        {"PUBREC", MqttType::Pubrec},           {"PUBREL", MqttType::Pubrel},
        {"PUBCOMP", MqttType::Pubcomp},         {"SUBSCRIBE", MqttType::Subscribe},
        {"SUBACK", MqttType::Suback},           {"UNSUBSCRIBE", MqttType::Unsubscribe},
        {"UNSUBACK", MqttType::Unsuback},       {"PINGREQ", MqttType::Pingreq},
        {"PINGRESP", MqttType::Pingresp},       {"DISCONNECT", MqttType::Disconnect},
        {"AUTH", MqttType::Auth},
    };
    auto it = table.find(state);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

void append_remaining_length(std::vector<std::uint8_t>& out, std::uint32_t value) {
    if (value > kMaxRemainingLength)
        throw CodecError("remaining length exceeds 268435455");
    do {
        std::uint8_t byte = value % 128;
        value /= 128;
        if (value > 0) byte |= 0x80;
        out.push_back(byte);
    } while (value > 0);
}

std::pair<std::uint32_t, std::size_t> decode_remaining_length(std::span<const std::uint8_t> bytes) {
    std::uint32_t value = 0;
    std::uint32_t multiplier = 1;
    for (std::size_t i = 0; i < 4; ++i) {
        if (i >= bytes.size()) throw CodecError("remaining length truncated");
        std::uint8_t byte = bytes[i];
        value += static_cast<std::uint32_t>(byte & 0x7f) * multiplier;
        if ((byte & 0x80) == 0) return {value, i + 1};
        multiplier *= 128;
    }
    throw CodecError("remaining length continuation exceeds 4 bytes");
}

namespace {

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void append_string_field(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > 0xffff) throw CodecError("string field exceeds 65535 bytes");
    append_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

// Seeded pool of field values: valid UTF-8, empty, and oversize entries.
std::string random_string(Rng& rng) {
    switch (rng.next_below(8)) {
    case 0: return "";
    case 1: return "a";
    case 2: return "fuzz";
    case 3: return "topic/" + std::to_string(rng.next_below(100));
    case 4: return "\xcf\x80/\xe2\x88\x82"; // "π/∂"
    case 5: return std::string(static_cast<std::size_t>(rng.next_between(200, 400)), 'A');
    case 6: {
        std::string s;
        std::size_t n = rng.next_between(1, 24);
        for (std::size_t i = 0; i < n; ++i)
            s.push_back(static_cast<char>('a' + rng.next_below(26)));
        return s;
    }
    default: return "client-" + std::to_string(rng.next_below(1000));
    }
}

int pick_qos(const MqttPacketParams& p, Rng& rng) {
    int qos = p.qos ? *p.qos : static_cast<int>(rng.next_below(3));
    if (qos < 0 || qos > 2) throw CodecError("QoS outside {0,1,2}");
    return qos;
}

std::uint16_t pick_packet_id(const MqttPacketParams& p, Rng& rng) {
    return p.packet_id ? *p.packet_id
                       : static_cast<std::uint16_t>(rng.next_between(1, 0xffff));
}

} // namespace

EncodedMessage encode_mqtt(const MqttPacketParams& params, Rng& rng) {
    std::uint8_t type_nibble = static_cast<std::uint8_t>(params.type);
    std::uint8_t flag_nibble = 0;
    std::vector<std::uint8_t> body; // variable header + payload

    switch (params.type) {
    case MqttType::Connect: {
        append_string_field(body, "MQTT");
        body.push_back(params.protocol_level.value_or(4));
        // Connect flags default to clean session or nothing; will/user/pass
        // bits are honored by emitting random fields for them.
        std::uint8_t flags =
            params.flags ? *params.flags : (rng.chance(0.5) ? std::uint8_t{0x02} : std::uint8_t{0x00});
        body.push_back(flags);
        append_u16(body, params.keep_alive ? *params.keep_alive
                                           : static_cast<std::uint16_t>(rng.next_below(601)));
        append_string_field(body, params.client_id ? *params.client_id : random_string(rng));
        if (flags & 0x04) { // will flag
            append_string_field(body, params.topic ? *params.topic : random_string(rng));
            append_string_field(body, random_string(rng));
        }
        if (flags & 0x80) append_string_field(body, random_string(rng)); // username
        if (flags & 0x40) append_string_field(body, random_string(rng)); // password
        break;
    }
    case MqttType::Connack:
        body.push_back(params.flags ? (*params.flags & 0x01)
                                    : static_cast<std::uint8_t>(rng.next_below(2)));
        body.push_back(static_cast<std::uint8_t>(rng.next_below(6))); // return code pool
        break;
    case MqttType::Publish: {
        int qos = pick_qos(params, rng);
        flag_nibble = params.flags ? (*params.flags & 0x0f)
                                   : static_cast<std::uint8_t>(qos << 1);
        append_string_field(body, params.topic ? *params.topic : random_string(rng));
        if (qos > 0) append_u16(body, pick_packet_id(params, rng));
        std::string payload = params.payload_text ? *params.payload_text : random_string(rng);
        body.insert(body.end(), payload.begin(), payload.end());
        break;
    }
    case MqttType::Puback:
    case MqttType::Pubrec:
    case MqttType::Pubcomp:
    case MqttType::Unsuback:
        append_u16(body, pick_packet_id(params, rng));
        break;
    case MqttType::Pubrel:
        flag_nibble = 0x02;
        append_u16(body, pick_packet_id(params, rng));
        break;
    case MqttType::Subscribe: {
        flag_nibble = 0x02;
        append_u16(body, pick_packet_id(params, rng));
        append_string_field(body, params.topic ? *params.topic : random_string(rng));
        body.push_back(static_cast<std::uint8_t>(pick_qos(params, rng)));
        break;
    }
    case MqttType::Suback: {
        append_u16(body, pick_packet_id(params, rng));
        static constexpr std::array<std::uint8_t, 4> codes{0x00, 0x01, 0x02, 0x80};
        body.push_back(codes[rng.next_below(codes.size())]);
        break;
    }
    case MqttType::Unsubscribe:
        flag_nibble = 0x02;
        append_u16(body, pick_packet_id(params, rng));
        append_string_field(body, params.topic ? *params.topic : random_string(rng));
        break;
    case MqttType::Pingreq:
    case MqttType::Pingresp:
    case MqttType::Disconnect:
    case MqttType::Auth:
        break; // fixed header only
    default:
        throw CodecError("unknown MQTT packet type");
    }

    EncodedMessage msg;
    msg.state = to_string(params.type);
    msg.bytes.push_back(static_cast<std::uint8_t>((type_nibble << 4) | flag_nibble));
    append_remaining_length(msg.bytes, static_cast<std::uint32_t>(body.size()));
    msg.bytes.insert(msg.bytes.end(), body.begin(), body.end());
    return msg;
}

MqttHeader decode_mqtt_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2) throw CodecError("packet truncated: need at least 2 bytes");
    std::uint8_t nibble = bytes[0] >> 4;
    if (nibble == 0) throw CodecError("reserved packet type 0");
    auto [value, consumed] = decode_remaining_length(bytes.subspan(1));
    return MqttHeader{static_cast<MqttType>(nibble), value, consumed + 1};
}

} // namespace mbfuzz
