// Copyright 2026 The cczst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cczst/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <utility>

#include "cczst/protocol_error.h"

namespace cczst::engine {

namespace {

std::runtime_error sys_error(const std::string &what) { return std::runtime_error(what + ": " + std::strerror(errno)); }

}  // namespace

LineChannel::LineChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {}

LineChannel::~LineChannel() { close_fds(); }

LineChannel::LineChannel(LineChannel &&other) noexcept
    : read_fd_(std::exchange(other.read_fd_, -1)),
      write_fd_(std::exchange(other.write_fd_, -1)),
      owns_(std::exchange(other.owns_, false)),
      buffer_(std::move(other.buffer_)),
      eof_(other.eof_) {}

LineChannel &LineChannel::operator=(LineChannel &&other) noexcept {
    if (this != &other) {
        close_fds();
        read_fd_ = std::exchange(other.read_fd_, -1);
        write_fd_ = std::exchange(other.write_fd_, -1);
        owns_ = std::exchange(other.owns_, false);
        buffer_ = std::move(other.buffer_);
        eof_ = other.eof_;
    }
    return *this;
}

void LineChannel::close_fds() {
    if (!owns_) return;
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
}

std::optional<std::string> LineChannel::read_line() {
    while (true) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (eof_) {
            if (buffer_.empty()) return std::nullopt;
            buffer_.clear();
            throw ProtocolError("stream ended inside a frame");
        }
        char chunk[4096];
        ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            eof_ = true;  // treat a broken connection like end of stream
            continue;
        }
        if (n == 0) {
            eof_ = true;
            continue;
        }
        buffer_.append(chunk, static_cast<size_t>(n));
    }
}

void LineChannel::write_line(std::string_view line) {
    std::string frame(line);
    frame.push_back('\n');
    size_t off = 0;
    while (off < frame.size()) {
        ssize_t n = ::send(write_fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, frame.data() + off, frame.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw sys_error("write failed");
        }
        off += static_cast<size_t>(n);
    }
}

void LineChannel::shutdown_write() { ::shutdown(write_fd_, SHUT_WR); }

LineChannel LineChannel::stdio() { return LineChannel(STDIN_FILENO, STDOUT_FILENO, false); }

std::pair<LineChannel, LineChannel> LineChannel::pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw sys_error("socketpair");
    return {LineChannel(fds[0], fds[0], true), LineChannel(fds[1], fds[1], true)};
}

Endpoint Endpoint::parse(std::string_view text) {
    Endpoint e;
    if (text == "stdio") {
        e.kind = Endpoint::Kind::Stdio;
        return e;
    }
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("endpoint must be 'stdio' or 'host:port'");
    std::string host(text.substr(0, colon));
    std::string port_text(text.substr(colon + 1));
    if (!host.empty()) e.host = host;
    int port = -1;
    try {
        size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception &) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw std::invalid_argument("bad port '" + port_text + "'");
    e.port = static_cast<uint16_t>(port);
    return e;
}

TcpListener::TcpListener(const std::string &host, uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw sys_error("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw std::invalid_argument("listen address must be an IPv4 literal, got '" + host + "'");
    }
    if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
        auto err = sys_error("bind/listen on " + host + ":" + std::to_string(port));
        ::close(fd_);
        throw err;
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

LineChannel TcpListener::accept() {
    int c;
    do {
        c = ::accept(fd_, nullptr, nullptr);
    } while (c < 0 && errno == EINTR);
    if (c < 0) throw sys_error("accept");
    int one = 1;
    ::setsockopt(c, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return LineChannel(c, c, true);
}

LineChannel tcp_connect(const std::string &host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res); rc != 0) {
        throw std::runtime_error("cannot resolve '" + host + "': " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo *p = res; p != nullptr; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw sys_error("connect to " + host + ":" + std::to_string(port));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return LineChannel(fd, fd, true);
}

}  // namespace cczst::engine
