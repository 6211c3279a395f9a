// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <thread>

#include "mbfuzz/testbed.hpp"

using namespace mbfuzz;

namespace {

std::optional<std::vector<std::uint8_t>> exchange(const Endpoint& endpoint,
                                                  const std::vector<std::uint8_t>& request,
                                                  int read_timeout_ms = 500) {
    auto conn = TcpStream::connect(endpoint, 500);
    if (!conn) return std::nullopt;
    if (conn->send_all(request) != IoState::Ok) return std::nullopt;
    std::vector<std::uint8_t> reply;
    if (conn->recv_some(reply, read_timeout_ms) != IoState::Ok) return std::nullopt;
    return reply;
}

void wait_until(const TestbedServer& server, bool up, int budget_ms = 3000) {
    for (int waited = 0; waited < budget_ms && server.accepting() != up; waited += 10)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
}

} // namespace

TEST_CASE("mqtt testbed answers the usual session packets") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    TestbedServer server(options);
    server.start();

    auto conn = TcpStream::connect(server.endpoint(), 500);
    REQUIRE(conn.has_value());

    auto roundtrip = [&](std::vector<std::uint8_t> request) {
        REQUIRE(conn->send_all(request) == IoState::Ok);
        std::vector<std::uint8_t> reply;
        REQUIRE(conn->recv_some(reply, 500) == IoState::Ok);
        return reply;
    };

    // CONNECT client "a"
    CHECK(roundtrip({0x10, 0x0d, 0x00, 0x04, 0x4d, 0x51, 0x54, 0x54, 0x04, 0x02, 0x00, 0x3c,
                     0x00, 0x01, 0x61}) == std::vector<std::uint8_t>{0x20, 0x02, 0x00, 0x00});
    // PINGREQ after CONNECT is fine
    CHECK(roundtrip({0xc0, 0x00}) == std::vector<std::uint8_t>{0xd0, 0x00});
    // SUBSCRIBE pid 0x0102 echoes the packet id in the SUBACK
    CHECK(roundtrip({0x82, 0x06, 0x01, 0x02, 0x00, 0x01, 0x61, 0x00}) ==
          std::vector<std::uint8_t>{0x90, 0x03, 0x01, 0x02, 0x00});
    // QoS1 PUBLISH gets a PUBACK with the right packet id
    CHECK(roundtrip({0x32, 0x06, 0x00, 0x01, 0x74, 0x00, 0x0a, 0x78}) ==
          std::vector<std::uint8_t>{0x40, 0x02, 0x00, 0x0a});
    // wrong-direction packet still gets the lenient marker ack
    CHECK(roundtrip({0x20, 0x02, 0x00, 0x00}) == std::vector<std::uint8_t>{0x7f, 0x20});
    CHECK(server.crashes() == 0);
    server.stop();
}

TEST_CASE("ping before connect crashes, then the testbed auto-restarts") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    options.restart_delay_ms = 200;
    TestbedServer server(options);
    server.start();

    CHECK_FALSE(exchange(server.endpoint(), {0xc0, 0x00}).has_value());
    CHECK(server.fired_ping_without_connect() == 1);
    CHECK(server.crashes() == 1);

    wait_until(server, false, 500);
    CHECK_FALSE(server.accepting());
    wait_until(server, true);
    CHECK(server.accepting());
    // back to answering
    auto reply = exchange(server.endpoint(),
                          {0x10, 0x0c, 0x00, 0x04, 0x4d, 0x51, 0x54, 0x54, 0x04, 0x02, 0x00,
                           0x00, 0x00, 0x00});
    REQUIRE(reply.has_value());
    CHECK((*reply)[0] == 0x20);
    server.stop();
}

TEST_CASE("a CONNECT on the same session disarms the ping fault") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    TestbedServer server(options);
    server.start();

    auto conn = TcpStream::connect(server.endpoint(), 500);
    REQUIRE(conn.has_value());
    std::vector<std::uint8_t> connect{0x10, 0x0c, 0x00, 0x04, 0x4d, 0x51, 0x54, 0x54,
                                      0x04, 0x02, 0x00, 0x00, 0x00, 0x00};
    REQUIRE(conn->send_all(connect) == IoState::Ok);
    std::vector<std::uint8_t> reply;
    REQUIRE(conn->recv_some(reply, 500) == IoState::Ok);

    std::vector<std::uint8_t> ping{0xc0, 0x00};
    REQUIRE(conn->send_all(ping) == IoState::Ok);
    reply.clear();
    REQUIRE(conn->recv_some(reply, 500) == IoState::Ok);
    CHECK(reply == std::vector<std::uint8_t>{0xd0, 0x00});
    CHECK(server.crashes() == 0);
    server.stop();
}

TEST_CASE("disabled ping fault answers instead of crashing") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    options.bugs.ping_without_connect = false;
    TestbedServer server(options);
    server.start();
    auto reply = exchange(server.endpoint(), {0xc0, 0x00});
    REQUIRE(reply.has_value());
    CHECK(*reply == std::vector<std::uint8_t>{0xd0, 0x00});
    CHECK(server.crashes() == 0);
    server.stop();
}

TEST_CASE("zero-length PUBLISH crashes only while the fault is armed") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    options.restart_delay_ms = 200;
    TestbedServer server(options);
    server.start();

    CHECK_FALSE(exchange(server.endpoint(), {0x30, 0x00}).has_value());
    CHECK(server.fired_zero_length_publish() == 1);
    server.stop();

    options.bugs.zero_length_publish = false;
    TestbedServer healthy(options);
    healthy.start();
    auto reply = exchange(healthy.endpoint(), {0x30, 0x00});
    REQUIRE(reply.has_value());
    CHECK(*reply == std::vector<std::uint8_t>{0x7f, 0x30});
    CHECK(healthy.fired_zero_length_publish() == 0);
    healthy.stop();
}

TEST_CASE("modbus testbed answers well-formed requests and crashes on short PDUs") {
    TestbedOptions options;
    options.kind = TestbedKind::Modbus;
    options.restart_delay_ms = 200;
    TestbedServer server(options);
    server.start();

    // read coils: tid 1, addr 0, count 8
    auto reply = exchange(server.endpoint(), {0x00, 0x01, 0x00, 0x00, 0x00, 0x06, 0x01, 0x01,
                                              0x00, 0x00, 0x00, 0x08});
    REQUIRE(reply.has_value());
    CHECK((*reply)[0] == 0x00); // transaction id echoed
    CHECK((*reply)[1] == 0x01);
    CHECK((*reply)[7] == 0x01); // function echoed
    CHECK(server.crashes() == 0);

    // write-multiple-registers with a 3-byte body: the 5-byte fixed parse dies
    CHECK_FALSE(exchange(server.endpoint(),
                         {0x00, 0x03, 0x00, 0x00, 0x00, 0x05, 0x01, 0x10, 0x00, 0x10, 0x00})
                     .has_value());
    CHECK(server.fired_short_pdu() == 1);
    server.stop();
}

TEST_CASE("disabled short-pdu fault answers with a modbus exception") {
    TestbedOptions options;
    options.kind = TestbedKind::Modbus;
    options.bugs.short_pdu = false;
    TestbedServer server(options);
    server.start();
    auto reply = exchange(server.endpoint(),
                          {0x00, 0x03, 0x00, 0x00, 0x00, 0x05, 0x01, 0x10, 0x00, 0x10, 0x00});
    REQUIRE(reply.has_value());
    CHECK((*reply)[7] == 0x90); // 0x80 | 0x10
    CHECK((*reply)[8] == 0x03);
    CHECK(server.crashes() == 0);
    server.stop();
}

TEST_CASE("without auto-restart the testbed stays down after a crash") {
    TestbedOptions options;
    options.kind = TestbedKind::Mqtt;
    options.auto_restart = false;
    TestbedServer server(options);
    server.start();
    CHECK_FALSE(exchange(server.endpoint(), {0xc0, 0x00}).has_value());
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    CHECK_FALSE(server.accepting());
    CHECK_FALSE(TcpStream::connect(server.endpoint(), 200).has_value());
    server.stop();
}

TEST_CASE("unknown modbus function draws an illegal-function exception") {
    TestbedOptions options;
    options.kind = TestbedKind::Modbus;
    TestbedServer server(options);
    server.start();
    // function 0x2a with a fat body parses (unknown functions are not the fault)
    auto reply = exchange(server.endpoint(), {0x00, 0x09, 0x00, 0x00, 0x00, 0x07, 0x01, 0x2a,
                                              0x01, 0x02, 0x03, 0x04, 0x05});
    REQUIRE(reply.has_value());
    CHECK((*reply)[7] == (0x80 | 0x2a));
    CHECK((*reply)[8] == 0x01);
    CHECK(server.crashes() == 0);
    server.stop();
}
