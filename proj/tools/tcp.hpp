#pragma once

// Minimal blocking TCP plumbing for the two-party demo. The protocol
// itself is transport-agnostic; this binding exists so two processes can
// exercise it end to end.

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <string>

#include "sol/bytes.hpp"
#include "sol/errors.hpp"

class TcpStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    TcpStream& operator=(TcpStream&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    ~TcpStream() { close_fd(); }

    void send(const sol::Bytes& data) {
        size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, 0);
            if (n <= 0) throw sol::IoError("connection lost while sending");
            sent += static_cast<size_t>(n);
        }
    }

    sol::Bytes recv_exact(size_t n) {
        sol::Bytes out(n);
        size_t got = 0;
        while (got < n) {
            ssize_t r = ::recv(fd_, out.data() + got, n - got, 0);
            if (r <= 0) throw sol::IoError("connection closed by peer");
            got += static_cast<size_t>(r);
        }
        return out;
    }

private:
    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    int fd_ = -1;
};

inline TcpStream tcp_listen_accept(uint16_t port) {
    int server = ::socket(AF_INET, SOCK_STREAM, 0);
    if (server < 0) throw sol::IoError("socket() failed");
    int one = 1;
    ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(server);
        throw sol::IoError("bind failed on port " + std::to_string(port));
    }
    if (::listen(server, 1) != 0) {
        ::close(server);
        throw sol::IoError("listen failed");
    }
    int client = ::accept(server, nullptr, nullptr);
    ::close(server);
    if (client < 0) throw sol::IoError("accept failed");
    return TcpStream(client);
}

inline TcpStream tcp_connect(const std::string& host_port) {
    size_t colon = host_port.rfind(':');
    if (colon == std::string::npos)
        throw sol::InvalidConfig("--connect expects host:port");
    std::string host = host_port.substr(0, colon);
    std::string port = host_port.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &result) != 0 || !result)
        throw sol::IoError("cannot resolve " + host_port);

    // The peer may still be starting up; retry briefly.
    int fd = -1;
    for (int attempt = 0; attempt < 40; attempt++) {
        fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
        if (fd < 0) break;
        if (::connect(fd, result->ai_addr, result->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
        ::usleep(100 * 1000);
    }
    ::freeaddrinfo(result);
    if (fd < 0) throw sol::IoError("cannot connect to " + host_port);
    return TcpStream(fd);
}
