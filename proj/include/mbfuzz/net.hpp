// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mbfuzz {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    std::string str() const { return host + ":" + std::to_string(port); }
};

Endpoint parse_endpoint(const std::string& text); // "host:port", throws ConfigError

enum class IoState { Ok, Timeout, Closed, Reset, Error };

// Non-blocking TCP client socket with poll-based timeouts. Movable only.
class TcpStream {
public:
    TcpStream() = default;
    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    static std::optional<TcpStream> connect(const Endpoint& endpoint, int timeout_ms);

    IoState send_all(std::span<const std::uint8_t> bytes, int timeout_ms = 1000);
    // Appends whatever arrives first (one read) to out.
    IoState recv_some(std::vector<std::uint8_t>& out, int timeout_ms);
    void close();
    bool valid() const { return fd_ >= 0; }

    explicit TcpStream(int fd) : fd_(fd) {}
    int fd() const { return fd_; }

private:
    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& other) noexcept;
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    // port 0 binds an ephemeral port; throws std::runtime_error on failure.
    static TcpListener bind_loopback(std::uint16_t port);

    std::optional<TcpStream> accept(int timeout_ms);
    std::uint16_t port() const { return port_; }
    void close();
    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

} // namespace mbfuzz
