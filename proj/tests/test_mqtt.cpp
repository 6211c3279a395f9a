// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mbfuzz/errors.hpp"
#include "mbfuzz/mqtt.hpp"
#include "mbfuzz/util.hpp"

using namespace mbfuzz;

namespace {

std::vector<std::uint8_t> golden(const std::string& name) {
    const char* base = std::getenv("MBFUZZ_TEST_DATA");
    std::string dir = base ? base : "tests";
    std::ifstream in(dir + "/golden/" + name);
    REQUIRE_MESSAGE(in.good(), "missing golden fixture " << name);
    std::ostringstream text;
    text << in.rdbuf();
    return hex_decode(text.str());
}

Rng fresh() { return Rng(0); }

} // namespace

TEST_CASE("PINGREQ and DISCONNECT golden bytes") {
    Rng rng = fresh();
    MqttPacketParams ping;
    ping.type = MqttType::Pingreq;
    CHECK(encode_mqtt(ping, rng).bytes == golden("mqtt_pingreq.hex"));

    MqttPacketParams disc;
    disc.type = MqttType::Disconnect;
    CHECK(encode_mqtt(disc, rng).bytes == golden("mqtt_disconnect.hex"));
}

TEST_CASE("CONNECT golden bytes") {
    Rng rng = fresh();

    MqttPacketParams basic;
    basic.type = MqttType::Connect;
    basic.client_id = "a";
    basic.protocol_level = 4;
    basic.keep_alive = 60;
    basic.flags = 0x02;
    CHECK(encode_mqtt(basic, rng).bytes == golden("mqtt_connect_basic.hex"));

    MqttPacketParams empty;
    empty.type = MqttType::Connect;
    empty.client_id = "";
    empty.protocol_level = 4;
    empty.keep_alive = 0;
    empty.flags = 0x02;
    CHECK(encode_mqtt(empty, rng).bytes == golden("mqtt_connect_empty_id.hex"));

    MqttPacketParams max;
    max.type = MqttType::Connect;
    max.client_id = "fuzz";
    max.protocol_level = 4;
    max.keep_alive = 0xffff;
    max.flags = 0x00;
    CHECK(encode_mqtt(max, rng).bytes == golden("mqtt_connect_keepalive_max.hex"));
}

TEST_CASE("PUBLISH golden bytes") {
    Rng rng = fresh();

    MqttPacketParams qos0;
    qos0.type = MqttType::Publish;
    qos0.topic = "a/b";
    qos0.payload_text = "hi";
    qos0.qos = 0;
    CHECK(encode_mqtt(qos0, rng).bytes == golden("mqtt_publish_qos0.hex"));

    MqttPacketParams qos1;
    qos1.type = MqttType::Publish;
    qos1.topic = "t";
    qos1.payload_text = "x";
    qos1.qos = 1;
    qos1.packet_id = 10;
    CHECK(encode_mqtt(qos1, rng).bytes == golden("mqtt_publish_qos1.hex"));

    MqttPacketParams qos2;
    qos2.type = MqttType::Publish;
    qos2.topic = "ab";
    qos2.payload_text = "";
    qos2.qos = 2;
    qos2.packet_id = 0xbeef;
    qos2.flags = 0x05; // qos2 + retain
    CHECK(encode_mqtt(qos2, rng).bytes == golden("mqtt_publish_qos2_retain.hex"));

    MqttPacketParams dup;
    dup.type = MqttType::Publish;
    dup.topic = "";
    dup.payload_text = "p";
    dup.qos = 0;
    dup.flags = 0x08; // dup bit
    CHECK(encode_mqtt(dup, rng).bytes == golden("mqtt_publish_dup_empty_topic.hex"));

    MqttPacketParams big;
    big.type = MqttType::Publish;
    big.topic = "tt";
    big.payload_text = std::string(124, 'A');
    big.qos = 0;
    auto bytes = encode_mqtt(big, rng).bytes;
    CHECK(bytes == golden("mqtt_publish_two_byte_length.hex"));

    // 0x80 0x01 is remaining length 128 with a 3-byte header
    MqttHeader header = decode_mqtt_header(bytes);
    CHECK(header.type == MqttType::Publish);
    CHECK(header.remaining_length == 128);
    CHECK(header.header_size == 3);
}

TEST_CASE("SUBSCRIBE golden bytes") {
    Rng rng = fresh();

    MqttPacketParams s1;
    s1.type = MqttType::Subscribe;
    s1.packet_id = 1;
    s1.topic = "a";
    s1.qos = 0;
    CHECK(encode_mqtt(s1, rng).bytes == golden("mqtt_subscribe_single.hex"));

    MqttPacketParams s2;
    s2.type = MqttType::Subscribe;
    s2.packet_id = 0x0102;
    s2.topic = "a/b";
    s2.qos = 1;
    CHECK(encode_mqtt(s2, rng).bytes == golden("mqtt_subscribe_qos1.hex"));

    MqttPacketParams s3;
    s3.type = MqttType::Subscribe;
    s3.packet_id = 0xffff;
    s3.topic = "#";
    s3.qos = 2;
    CHECK(encode_mqtt(s3, rng).bytes == golden("mqtt_subscribe_wildcard.hex"));
}

TEST_CASE("CONNECT round-trips through the header decoder") {
    Rng rng(7);
    MqttPacketParams params;
    params.type = MqttType::Connect;
    params.client_id = "a";
    params.protocol_level = 4;
    params.keep_alive = 60;
    params.flags = 0x02;
    auto msg = encode_mqtt(params, rng);

    MqttHeader header = decode_mqtt_header(msg.bytes);
    CHECK(header.type == MqttType::Connect);
    CHECK(header.remaining_length == msg.bytes.size() - header.header_size);
}

TEST_CASE("every packet type encodes to a self-consistent frame") {
    for (int t = 1; t <= 15; ++t) {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(seed);
            MqttPacketParams params;
            params.type = static_cast<MqttType>(t);
            auto msg = encode_mqtt(params, rng);
            REQUIRE(msg.bytes.size() >= 2);
            MqttHeader header = decode_mqtt_header(msg.bytes);
            CHECK(static_cast<int>(header.type) == t);
            CHECK(header.remaining_length == msg.bytes.size() - header.header_size);
            CHECK(msg.state == to_string(params.type));
        }
    }
}

TEST_CASE("identical params and seed give identical bytes") {
    MqttPacketParams params;
    params.type = MqttType::Publish;
    Rng a(99), b(99);
    CHECK(encode_mqtt(params, a).bytes == encode_mqtt(params, b).bytes);
}

TEST_CASE("remaining length round-trips on boundaries and random values") {
    for (std::uint32_t value : {0u, 127u, 128u, 16'383u, 16'384u, 268'435'455u}) {
        std::vector<std::uint8_t> buf;
        append_remaining_length(buf, value);
        auto [decoded, used] = decode_remaining_length(buf);
        CHECK(decoded == value);
        CHECK(used == buf.size());
    }
    Rng rng(4711);
    for (int i = 0; i < 5000; ++i) {
        std::uint32_t value = static_cast<std::uint32_t>(rng.next_below(kMaxRemainingLength + 1));
        std::vector<std::uint8_t> buf;
        append_remaining_length(buf, value);
        auto [decoded, used] = decode_remaining_length(buf);
        CHECK(decoded == value);
        CHECK(used == buf.size());
    }
    std::vector<std::uint8_t> buf;
    CHECK_THROWS_AS(append_remaining_length(buf, kMaxRemainingLength + 1), CodecError);
}

TEST_CASE("decoder rejects truncated and malformed headers") {
    std::vector<std::uint8_t> one{0x30};
    CHECK_THROWS_AS(decode_mqtt_header(one), CodecError);

    std::vector<std::uint8_t> dangling{0x30, 0x80};
    CHECK_THROWS_AS(decode_mqtt_header(dangling), CodecError);

    std::vector<std::uint8_t> endless{0x30, 0x80, 0x80, 0x80, 0x80};
    CHECK_THROWS_AS(decode_mqtt_header(endless), CodecError);

    std::vector<std::uint8_t> reserved{0x00, 0x00};
    CHECK_THROWS_AS(decode_mqtt_header(reserved), CodecError);

    std::vector<std::uint8_t> example{0x30, 0x80, 0x01};
    auto header = decode_mqtt_header(example);
    CHECK(header.remaining_length == 128);
    CHECK(header.header_size == 3);
}

TEST_CASE("qos outside the valid range is rejected") {
    Rng rng(1);
    MqttPacketParams params;
    params.type = MqttType::Publish;
    params.qos = 3;
    CHECK_THROWS_AS(encode_mqtt(params, rng), CodecError);
}

TEST_CASE("state names map onto packet types") {
    CHECK(mqtt_type_from_state("CONNECT") == MqttType::Connect);
    CHECK(mqtt_type_from_state("AUTH") == MqttType::Auth);
    CHECK_FALSE(mqtt_type_from_state("PUBBLISH").has_value());
}
