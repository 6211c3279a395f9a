// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/testbed.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <chrono>
#include <condition_variable>

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

namespace {

long long now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Active connection bookkeeping shared by all testbed instances would be
// wrong; keep it per-server via these members instead.
constexpr std::size_t kMaxBody = 1u << 20;

// Buffered reads over a TcpStream; need(n) blocks until n unconsumed bytes
// are available or the connection goes quiet.
struct ConnReader {
    TcpStream& conn;
    int timeout_ms;
    std::vector<std::uint8_t> buf;
    std::size_t pos = 0;

    bool need(std::size_t n) {
        while (buf.size() - pos < n) {
            if (conn.recv_some(buf, timeout_ms) != IoState::Ok) return false;
        }
        return true;
    }
    std::uint8_t at(std::size_t i) const { return buf[pos + i]; }
    const std::uint8_t* data(std::size_t i) const { return buf.data() + pos + i; }
    void consume(std::size_t n) {
        pos += n;
        if (pos > (1u << 16)) {
            buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(pos));
            pos = 0;
        }
    }
};

std::uint16_t be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

} // namespace

TestbedKind testbed_kind_from_string(const std::string& name) {
    if (name == "mqtt") return TestbedKind::Mqtt;
    if (name == "modbus") return TestbedKind::Modbus;
    if (name == "echo") return TestbedKind::Echo;
    throw ConfigError("unknown testbed kind '" + name + "' (mqtt|modbus|echo)");
}

std::optional<std::string> testbed_parse_modbus_pdu(std::span<const std::uint8_t> pdu) {
    if (pdu.empty()) return "pdu underflow: missing function code";
    std::uint8_t fn = pdu[0];
    std::size_t body = pdu.size() - 1;
    std::size_t required = 0;
    switch (fn) {
    case 0x01:
    case 0x03:
    case 0x06: required = 4; break;
    case 0x10: required = 5; break; // address, count, byte count
    case 0x14: required = 8; break;
    case 0x2b: required = 3; break;
    default: return std::nullopt; // unknown function: answered with an exception, not a crash
    }
    if (body < required)
        return "pdu underflow: function " + std::to_string(fn) + " needs " +
               std::to_string(required) + " body bytes, got " + std::to_string(body);
    return std::nullopt;
}

TestbedServer::TestbedServer(TestbedOptions options) : options_(options) {}

TestbedServer::~TestbedServer() { stop(); }

Endpoint TestbedServer::endpoint() const { return Endpoint{"127.0.0.1", port_}; }

void TestbedServer::start() {
    {
        std::lock_guard lock(conn_mutex_);
        listener_ = TcpListener::bind_loopback(options_.port);
        port_ = listener_.port();
    }
    up_ = true;
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TestbedServer::stop() {
    if (!accept_thread_.joinable() && !up_) return;
    stopping_ = true;
    up_ = false;
    {
        std::lock_guard lock(conn_mutex_);
        listener_.close();
        for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::unique_lock lock(active_mutex_);
    active_cv_.wait_for(lock, std::chrono::seconds(5),
                        [this] { return active_conns_.load() == 0; });
}

void TestbedServer::register_conn(int fd) {
    std::lock_guard lock(conn_mutex_);
    live_fds_.push_back(fd);
}

void TestbedServer::unregister_conn(int fd) {
    std::lock_guard lock(conn_mutex_);
    std::erase(live_fds_, fd);
}

void TestbedServer::crash(std::atomic<int>& counter) {
    counter.fetch_add(1);
    crashes_.fetch_add(1);
    crash_at_ms_.store(now_ms());
    up_ = false;
    std::lock_guard lock(conn_mutex_);
    listener_.close(); // refuse probes immediately
    for (int fd : live_fds_) ::shutdown(fd, SHUT_RDWR);
}

void TestbedServer::accept_loop() {
    while (!stopping_) {
        if (!up_) {
            if (!options_.auto_restart) {
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
                continue;
            }
            long long target = crash_at_ms_.load() + options_.restart_delay_ms;
            if (now_ms() < target) {
                std::this_thread::sleep_for(std::chrono::milliseconds(5));
                continue;
            }
            std::lock_guard lock(conn_mutex_);
            try {
                listener_ = TcpListener::bind_loopback(port_);
            } catch (const std::exception&) {
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
                continue;
            }
            up_ = true;
            continue;
        }

        // Poll outside the lock so crash() can close the listener promptly and
        // accepts do not throttle each other.
        int listen_fd = -1;
        {
            std::lock_guard lock(conn_mutex_);
            if (!listener_.valid()) continue;
            listen_fd = listener_.fd();
        }
        pollfd pfd{listen_fd, POLLIN, 0};
        if (::poll(&pfd, 1, 20) <= 0) continue;
        std::optional<TcpStream> conn;
        {
            std::lock_guard lock(conn_mutex_);
            if (!listener_.valid() || listener_.fd() != listen_fd) continue;
            conn = listener_.accept(0);
        }
        if (conn && up_ && !stopping_) {
            active_conns_.fetch_add(1);
            std::thread([this, c = std::move(*conn)]() mutable {
                register_conn(c.fd());
                switch (options_.kind) {
                case TestbedKind::Mqtt: serve_mqtt(std::move(c)); break;
                case TestbedKind::Modbus: serve_modbus(std::move(c)); break;
                case TestbedKind::Echo: serve_echo(std::move(c)); break;
                }
                active_conns_.fetch_sub(1);
                active_cv_.notify_all();
            }).detach();
        }
    }
}

void TestbedServer::serve_mqtt(TcpStream conn) {
    int fd = conn.fd();
    ConnReader reader{conn, options_.idle_timeout_ms, {}, 0};
    bool connect_seen = false;

    while (!stopping_ && up_) {
        if (!reader.need(1)) break;
        std::uint8_t first = reader.at(0);

        std::uint32_t remaining = 0;
        std::uint32_t multiplier = 1;
        std::size_t header = 0;
        bool complete = false;
        for (std::size_t i = 1; i <= 4; ++i) {
            if (!reader.need(i + 1)) { unregister_conn(fd); return; }
            std::uint8_t b = reader.at(i);
            remaining += static_cast<std::uint32_t>(b & 0x7f) * multiplier;
            multiplier *= 128;
            if ((b & 0x80) == 0) {
                header = i + 1;
                complete = true;
                break;
            }
        }
        if (!complete || remaining > kMaxBody) break; // desync: drop the session
        if (!reader.need(header + remaining)) break;

        std::uint8_t type = first >> 4;
        if (type == 0) break;

        if (type == 3 && remaining == 0 && options_.bugs.zero_length_publish) {
            unregister_conn(fd);
            crash(fired_publen_);
            return;
        }
        if (type == 12 && !connect_seen && options_.bugs.ping_without_connect) {
            unregister_conn(fd);
            crash(fired_ping_);
            return;
        }
        if (type == 1) connect_seen = true;

        const std::uint8_t* body = reader.data(header);
        auto pid = [&](std::size_t off) -> std::uint16_t {
            return remaining >= off + 2 ? be16(body + off) : 0;
        };

        std::vector<std::uint8_t> resp;
        switch (type) {
        case 1: resp = {0x20, 0x02, 0x00, 0x00}; break;
        case 3: {
            int qos = (first >> 1) & 0x03;
            if (qos == 1 || qos == 2) {
                std::uint16_t topic_len = remaining >= 2 ? be16(body) : 0;
                std::uint16_t id = pid(2 + topic_len);
                resp = {static_cast<std::uint8_t>(qos == 1 ? 0x40 : 0x50), 0x02,
                        static_cast<std::uint8_t>(id >> 8), static_cast<std::uint8_t>(id & 0xff)};
            } else {
                resp = {0x7f, first};
            }
            break;
        }
        case 6: {
            std::uint16_t id = pid(0);
            resp = {0x70, 0x02, static_cast<std::uint8_t>(id >> 8),
                    static_cast<std::uint8_t>(id & 0xff)};
            break;
        }
        case 8: {
            std::uint16_t id = pid(0);
            resp = {0x90, 0x03, static_cast<std::uint8_t>(id >> 8),
                    static_cast<std::uint8_t>(id & 0xff), 0x00};
            break;
        }
        case 10: {
            std::uint16_t id = pid(0);
            resp = {0xb0, 0x02, static_cast<std::uint8_t>(id >> 8),
                    static_cast<std::uint8_t>(id & 0xff)};
            break;
        }
        case 12: resp = {0xd0, 0x00}; break;
        default: resp = {0x7f, first}; break; // lenient marker ack, session stays open
        }
        if (conn.send_all(resp) != IoState::Ok) break;
        reader.consume(header + remaining);
    }
    unregister_conn(fd);
}

void TestbedServer::serve_modbus(TcpStream conn) {
    int fd = conn.fd();
    ConnReader reader{conn, options_.idle_timeout_ms, {}, 0};

    while (!stopping_ && up_) {
        if (!reader.need(7)) break;
        std::uint16_t tid = be16(reader.data(0));
        std::uint16_t length = be16(reader.data(4));
        if (length < 1 || length > 1024) break; // unframeable: drop the session
        std::size_t pdu_len = static_cast<std::size_t>(length) - 1;
        if (!reader.need(7 + pdu_len)) break;
        std::uint8_t unit = reader.at(6);
        std::span<const std::uint8_t> pdu(reader.data(7), pdu_len);

        if (auto err = testbed_parse_modbus_pdu(pdu)) {
            if (options_.bugs.short_pdu) {
                unregister_conn(fd);
                crash(fired_pdu_);
                return;
            }
            std::uint8_t fn = pdu.empty() ? 0 : pdu[0];
            std::vector<std::uint8_t> resp = {static_cast<std::uint8_t>(tid >> 8),
                                              static_cast<std::uint8_t>(tid & 0xff),
                                              0x00,
                                              0x00,
                                              0x00,
                                              0x03,
                                              unit,
                                              static_cast<std::uint8_t>(0x80 | fn),
                                              0x03};
            if (conn.send_all(resp) != IoState::Ok) break;
            reader.consume(7 + pdu_len);
            continue;
        }

        std::uint8_t fn = pdu[0];
        std::vector<std::uint8_t> out; // response PDU
        switch (fn) {
        case 0x01: out = {fn, 0x01, 0x00}; break;
        case 0x03: out = {fn, 0x02, 0x00, 0x00}; break;
        case 0x06: out = {fn, pdu[1], pdu[2], pdu[3], pdu[4]}; break;
        case 0x10: out = {fn, pdu[1], pdu[2], pdu[3], pdu[4]}; break;
        case 0x14: out = {fn, 0x05, 0x04, 0x06, 0x00, 0x00, 0x00, 0x00}; break;
        case 0x2b: out = {fn, 0x0e, pdu[2], 0x01, 0x00, 0x00, 0x01, 0x00, 0x03, 'm', 'b', 'f'}; break;
        default: out = {static_cast<std::uint8_t>(0x80 | fn), 0x01}; break;
        }
        std::vector<std::uint8_t> resp = {static_cast<std::uint8_t>(tid >> 8),
                                          static_cast<std::uint8_t>(tid & 0xff), 0x00, 0x00};
        std::uint16_t rlen = static_cast<std::uint16_t>(out.size() + 1);
        resp.push_back(static_cast<std::uint8_t>(rlen >> 8));
        resp.push_back(static_cast<std::uint8_t>(rlen & 0xff));
        resp.push_back(unit);
        resp.insert(resp.end(), out.begin(), out.end());
        if (conn.send_all(resp) != IoState::Ok) break;
        reader.consume(7 + pdu_len);
    }
    unregister_conn(fd);
}

void TestbedServer::serve_echo(TcpStream conn) {
    int fd = conn.fd();
    while (!stopping_ && up_) {
        std::vector<std::uint8_t> chunk;
        if (conn.recv_some(chunk, options_.idle_timeout_ms) != IoState::Ok) break;
        if (conn.send_all(chunk) != IoState::Ok) break;
    }
    unregister_conn(fd);
}

} // namespace mbfuzz
