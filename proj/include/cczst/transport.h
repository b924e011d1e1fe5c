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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cczst::engine {

/// Newline-delimited frames over a pair of file descriptors.
class LineChannel {
   public:
    LineChannel(int read_fd, int write_fd, bool owns_fds);
    ~LineChannel();
    LineChannel(LineChannel &&other) noexcept;
    LineChannel &operator=(LineChannel &&other) noexcept;
    LineChannel(const LineChannel &) = delete;
    LineChannel &operator=(const LineChannel &) = delete;

    /// Next frame without its newline; nullopt on clean end of stream.
    /// Throws ProtocolError when the stream ends inside a frame.
    std::optional<std::string> read_line();

    /// Writes `line` plus a newline. Throws std::runtime_error on I/O failure.
    void write_line(std::string_view line);

    /// Half-closes the write side (sockets) so the peer sees end of stream.
    void shutdown_write();

    static LineChannel stdio();

    /// Two connected channels over a socketpair, for in-process tests.
    static std::pair<LineChannel, LineChannel> pair();

   private:
    void close_fds();

    int read_fd_ = -1;
    int write_fd_ = -1;
    bool owns_ = false;
    std::string buffer_;
    bool eof_ = false;
};

struct Endpoint {
    enum class Kind { Stdio, Tcp };
    Kind kind = Kind::Tcp;
    std::string host = "127.0.0.1";
    uint16_t port = 7878;

    /// "stdio", "host:port" or ":port".
    static Endpoint parse(std::string_view text);
};

constexpr uint16_t kDefaultPort = 7878;

class TcpListener {
   public:
    /// Port 0 picks a free port; see port().
    TcpListener(const std::string &host, uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener &) = delete;
    TcpListener &operator=(const TcpListener &) = delete;

    uint16_t port() const { return port_; }
    LineChannel accept();

   private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

LineChannel tcp_connect(const std::string &host, uint16_t port);

}  // namespace cczst::engine
