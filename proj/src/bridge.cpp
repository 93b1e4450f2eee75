// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/bridge.hpp"

#include <cerrno>
#include <cstring>

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd::bridge {

namespace {

template <typename T>
void put_le(std::uint8_t* dst, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* src) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(src[i]) << (8 * i);
    return v;
}

std::string_view type_name(MsgType t) {
    switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::DenoiseReq: return "DENOISE_REQ";
    case MsgType::DenoiseResp: return "DENOISE_RESP";
    case MsgType::Error: return "ERROR";
    case MsgType::Bye: return "BYE";
    }
    return "?";
}

}  // namespace

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& h) {
    std::array<std::uint8_t, kHeaderSize> out{};
    put_le<std::uint32_t>(out.data(), static_cast<std::uint32_t>(h.type));
    put_le<std::uint32_t>(out.data() + 4, h.json_len);
    put_le<std::uint64_t>(out.data() + 8, h.payload_len);
    return out;
}

FrameHeader decode_header(const std::array<std::uint8_t, kHeaderSize>& bytes) {
    FrameHeader h;
    const auto type = get_le<std::uint32_t>(bytes.data());
    if (type < 1 || type > 5) throw FormatError(fmt::format("unknown bridge message type {}", type));
    h.type = static_cast<MsgType>(type);
    h.json_len = get_le<std::uint32_t>(bytes.data() + 4);
    h.payload_len = get_le<std::uint64_t>(bytes.data() + 8);
    if (h.json_len > kMaxJsonBytes) throw FormatError(fmt::format("bridge JSON body of {} bytes too large", h.json_len));
    if (h.payload_len > kMaxPayloadBytes) {
        throw FormatError(fmt::format("bridge payload of {} bytes too large", h.payload_len));
    }
    return h;
}

std::vector<std::uint8_t> encode_f32(std::span<const float> values) {
    std::vector<std::uint8_t> out(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &values[i], 4);
        put_le<std::uint32_t>(out.data() + 4 * i, bits);
    }
    return out;
}

std::vector<float> decode_f32(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 4 != 0) throw FormatError("f32 payload length is not a multiple of 4");
    std::vector<float> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto bits = get_le<std::uint32_t>(bytes.data() + 4 * i);
        std::memcpy(&out[i], &bits, 4);
    }
    return out;
}

Channel::Channel(int read_fd, int write_fd, std::chrono::milliseconds timeout)
    : read_fd_(read_fd), write_fd_(write_fd), timeout_(timeout) {}

Channel::~Channel() { close(); }

Channel::Channel(Channel&& other) noexcept
    : read_fd_(std::exchange(other.read_fd_, -1)),
      write_fd_(std::exchange(other.write_fd_, -1)),
      timeout_(other.timeout_) {}

Channel& Channel::operator=(Channel&& other) noexcept {
    if (this != &other) {
        close();
        read_fd_ = std::exchange(other.read_fd_, -1);
        write_fd_ = std::exchange(other.write_fd_, -1);
        timeout_ = other.timeout_;
    }
    return *this;
}

void Channel::close() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
}

void Channel::read_exact(std::uint8_t* dst, std::size_t n) {
    while (n > 0) {
        if (timeout_.count() > 0) {
            pollfd pfd{read_fd_, POLLIN, 0};
            const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
            if (rc == 0) throw DenoiserError("bridge: timed out waiting for the adapter");
            if (rc < 0 && errno != EINTR) throw DenoiserError(fmt::format("bridge: poll failed: {}", std::strerror(errno)));
            if (rc < 0) continue;
        }
        const ssize_t got = ::read(read_fd_, dst, n);
        if (got == 0) throw DenoiserError("bridge: adapter closed the connection");
        if (got < 0) {
            if (errno == EINTR) continue;
            throw DenoiserError(fmt::format("bridge: read failed: {}", std::strerror(errno)));
        }
        dst += got;
        n -= static_cast<std::size_t>(got);
    }
}

void Channel::write_all(const std::uint8_t* src, std::size_t n) {
    while (n > 0) {
        ssize_t put = ::send(write_fd_, src, n, MSG_NOSIGNAL);
        if (put < 0 && errno == ENOTSOCK) put = ::write(write_fd_, src, n);
        if (put < 0) {
            if (errno == EINTR) continue;
            throw DenoiserError(fmt::format("bridge: write failed: {}", std::strerror(errno)));
        }
        src += put;
        n -= static_cast<std::size_t>(put);
    }
}

void Channel::send(const Message& msg) {
    if (!open()) throw DenoiserError("bridge: channel is closed");
    const std::string body = msg.body.dump();
    FrameHeader h{msg.type, static_cast<std::uint32_t>(body.size()), msg.payload.size()};
    const auto head = encode_header(h);
    write_all(head.data(), head.size());
    write_all(reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
    if (!msg.payload.empty()) write_all(msg.payload.data(), msg.payload.size());
}

Message Channel::receive() {
    if (!open()) throw DenoiserError("bridge: channel is closed");
    std::array<std::uint8_t, kHeaderSize> head{};
    read_exact(head.data(), head.size());
    const FrameHeader h = decode_header(head);
    std::string body(h.json_len, '\0');
    read_exact(reinterpret_cast<std::uint8_t*>(body.data()), body.size());
    Message msg;
    msg.type = h.type;
    try {
        msg.body = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("bridge: malformed JSON body: {}", e.what()));
    }
    msg.payload.resize(h.payload_len);
    read_exact(msg.payload.data(), msg.payload.size());
    return msg;
}

namespace {

Channel spawn_stdio(const std::string& command, std::chrono::milliseconds timeout, int* child_pid) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
        throw DenoiserError(fmt::format("bridge: socketpair failed: {}", std::strerror(errno)));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw DenoiserError(fmt::format("bridge: fork failed: {}", std::strerror(errno)));
    }
    if (pid == 0) {
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    if (child_pid != nullptr) *child_pid = pid;
    return Channel(fds[0], fds[0], timeout);
}

Channel connect_tcp(const std::string& host, const std::string& port, std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw DenoiserError(fmt::format("bridge: cannot resolve {}:{}: {}", host, port, ::gai_strerror(rc)));
    }
    int fd = -1;
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw DenoiserError(fmt::format("bridge: cannot connect to {}:{}", host, port));
    return Channel(fd, fd, timeout);
}

}  // namespace

Channel connect(const std::string& endpoint, std::chrono::milliseconds timeout, int* child_pid) {
    if (endpoint.rfind("stdio:", 0) == 0) return spawn_stdio(endpoint.substr(6), timeout, child_pid);
    if (endpoint.rfind("tcp:", 0) == 0) {
        const std::string rest = endpoint.substr(4);
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) throw ConfigError(fmt::format("bridge endpoint '{}' lacks a port", endpoint));
        return connect_tcp(rest.substr(0, colon), rest.substr(colon + 1), timeout);
    }
    throw ConfigError(fmt::format("bridge endpoint '{}' must start with stdio: or tcp:", endpoint));
}

BridgeDenoiser::BridgeDenoiser(const std::string& endpoint, std::chrono::milliseconds timeout)
    : channel_(connect(endpoint, timeout, &child_pid_)) {
    try {
        remote_ = handshake();
    } catch (...) {
        channel_.close();
        if (child_pid_ > 0) ::waitpid(child_pid_, nullptr, 0);
        throw;
    }
}

BridgeDenoiser::~BridgeDenoiser() {
    try {
        shutdown();
    } catch (...) {
    }
}

namespace {

[[noreturn]] void raise_remote(const Message& msg, std::string_view during) {
    const std::string code = msg.body.value("code", std::string("UNKNOWN"));
    const std::string message = msg.body.value("message", std::string());
    const std::string trace = msg.body.value("traceback", std::string());
    throw DenoiserError(fmt::format("bridge: adapter error {} during {}: {}{}{}", code, during, message,
                                    trace.empty() ? "" : "\n", trace));
}

}  // namespace

RemoteCapabilities BridgeDenoiser::handshake() {
    channel_.send(Message{MsgType::Hello, {{"protocol", kProtocolVersion}}, {}});
    const Message reply = channel_.receive();
    if (reply.type == MsgType::Error) raise_remote(reply, "handshake");
    if (reply.type != MsgType::Hello) {
        throw DenoiserError(fmt::format("bridge: expected HELLO, got {}", type_name(reply.type)));
    }
    RemoteCapabilities caps;
    caps.protocol = reply.body.value("protocol", 0);
    if (caps.protocol != kProtocolVersion) {
        throw DenoiserError(fmt::format("bridge: adapter speaks protocol {}, expected {}", caps.protocol, kProtocolVersion));
    }
    caps.deterministic = reply.body.value("deterministic", false);
    caps.concurrent_safe = reply.body.value("concurrent_safe", false);
    if (reply.body.contains("max_shape")) caps.max_shape = reply.body["max_shape"].get<std::vector<int>>();
    return caps;
}

DenoiserCapabilities BridgeDenoiser::capabilities() const {
    // One request in flight per connection.
    return {false, remote_.deterministic, false};
}

DenoisePrediction BridgeDenoiser::denoise(const DenoiseRequest& req) {
    const Shape s = req.clip.shape();
    if (!remote_.max_shape.empty()) {
        const int dims[4] = {s.frames, s.channels, s.height, s.width};
        for (std::size_t i = 0; i < 4 && i < remote_.max_shape.size(); ++i) {
            if (dims[i] > remote_.max_shape[i]) {
                throw DenoiserError(fmt::format("bridge: clip {} exceeds adapter limit on axis {}", s.str(), i));
            }
        }
    }
    Message msg;
    msg.type = MsgType::DenoiseReq;
    msg.body = {{"shape", {s.frames, s.channels, s.height, s.width}},
                {"dtype", "f32le"},
                {"timestep", req.t},
                {"conditioning", req.conditioning},
                {"clip_id", req.clip_id},
                {"path", std::string(to_string(req.path))}};
    msg.payload = encode_f32(req.clip.data());
    const std::string where = fmt::format("clip {} ({}) at t={}", req.clip_id, to_string(req.path), req.t);
    try {
        channel_.send(msg);
        const Message reply = channel_.receive();
        if (reply.type == MsgType::Error) raise_remote(reply, where);
        if (reply.type != MsgType::DenoiseResp) {
            throw DenoiserError(fmt::format("bridge: expected DENOISE_RESP, got {}", type_name(reply.type)));
        }
        const auto shape = reply.body.value("shape", std::vector<int>{});
        if (shape != std::vector<int>{s.frames, s.channels, s.height, s.width} ||
            reply.body.value("dtype", std::string()) != "f32le" || reply.payload.size() != s.size() * 4) {
            throw DenoiserError("bridge: response shape or dtype does not match the request");
        }
        return DenoisePrediction{LatentVideo(s, decode_f32(reply.payload)), req.t};
    } catch (const DenoiserError& e) {
        throw DenoiserError(fmt::format("{} [{}]", e.what(), where));
    } catch (const FormatError& e) {
        throw DenoiserError(fmt::format("bridge: malformed frame: {} [{}]", e.what(), where));
    }
}

void BridgeDenoiser::shutdown() {
    if (channel_.open()) {
        try {
            channel_.send(Message{MsgType::Bye, nlohmann::json::object(), {}});
        } catch (const DenoiserError&) {
        }
        channel_.close();
    }
    if (child_pid_ > 0) {
        ::waitpid(child_pid_, nullptr, 0);
        child_pid_ = -1;
    }
}

}  // namespace glcd::bridge
