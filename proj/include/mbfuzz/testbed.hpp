// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mbfuzz/net.hpp"

namespace mbfuzz {

enum class TestbedKind { Mqtt, Modbus, Echo };

TestbedKind testbed_kind_from_string(const std::string& name); // throws ConfigError

// The three seeded faults. Each crashes the whole process analog: the server
// drops every connection and stops accepting for restart_delay_ms.
struct TestbedBugs {
    bool ping_without_connect = true;  // MQTT: PINGREQ before any parsed CONNECT
    bool zero_length_publish = true;   // MQTT: PUBLISH with remaining length 0
    bool short_pdu = true;             // Modbus: PDU body below the fixed layout
};

struct TestbedOptions {
    TestbedKind kind = TestbedKind::Mqtt;
    std::uint16_t port = 0; // 0 = ephemeral
    TestbedBugs bugs;
    bool auto_restart = true;
    int restart_delay_ms = 700;
    int idle_timeout_ms = 5000; // reap silent connections
};

// Deliberately lenient target: answers every parsed packet so the harness
// never waits out its read timeout, and never closes a session except on
// parse desync or crash.
class TestbedServer {
public:
    explicit TestbedServer(TestbedOptions options);
    ~TestbedServer();

    void start(); // throws on bind failure
    void stop();

    Endpoint endpoint() const;
    std::uint16_t port() const { return port_; }

    bool accepting() const { return up_.load(); }

    int crashes() const { return crashes_.load(); }
    int fired_ping_without_connect() const { return fired_ping_.load(); }
    int fired_zero_length_publish() const { return fired_publen_.load(); }
    int fired_short_pdu() const { return fired_pdu_.load(); }

private:
    void accept_loop();
    void serve_mqtt(TcpStream conn);
    void serve_modbus(TcpStream conn);
    void serve_echo(TcpStream conn);
    void crash(std::atomic<int>& counter);
    void register_conn(int fd);
    void unregister_conn(int fd);

    TestbedOptions options_;
    std::uint16_t port_ = 0;
    TcpListener listener_;
    std::thread accept_thread_;
    std::mutex conn_mutex_;
    std::vector<int> live_fds_;
    std::mutex active_mutex_;
    std::condition_variable active_cv_;
    std::atomic<int> active_conns_{0};
    std::atomic<bool> stopping_{false};
    std::atomic<bool> up_{false};
    std::atomic<long long> crash_at_ms_{0};
    std::atomic<int> crashes_{0};
    std::atomic<int> fired_ping_{0};
    std::atomic<int> fired_publen_{0};
    std::atomic<int> fired_pdu_{0};
};

// The Modbus request decode the testbed runs, exposed for direct testing.
// Returns an error description when the PDU body is shorter than the
// function's fixed field layout (the short-PDU fault's trigger), nullopt when
// the request parses.
std::optional<std::string> testbed_parse_modbus_pdu(std::span<const std::uint8_t> pdu);

} // namespace mbfuzz
