// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glcd/denoiser.hpp"

namespace glcd::bridge {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::uint32_t kMaxJsonBytes = 1u << 20;
inline constexpr std::uint64_t kMaxPayloadBytes = 1ull << 32;

enum class MsgType : std::uint32_t { Hello = 1, DenoiseReq = 2, DenoiseResp = 3, Error = 4, Bye = 5 };

/// Fixed 16-byte little-endian frame header: u32 type, u32 json_len, u64
/// payload_len. The JSON body and then the raw payload follow it.
struct FrameHeader {
    MsgType type = MsgType::Hello;
    std::uint32_t json_len = 0;
    std::uint64_t payload_len = 0;
};

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& h);
/// Throws FormatError on an unknown message type or oversize lengths.
FrameHeader decode_header(const std::array<std::uint8_t, kHeaderSize>& bytes);

struct Message {
    MsgType type = MsgType::Hello;
    nlohmann::json body = nlohmann::json::object();
    std::vector<std::uint8_t> payload;
};

/// Little-endian f32 payload encoding.
std::vector<std::uint8_t> encode_f32(std::span<const float> values);
std::vector<float> decode_f32(std::span<const std::uint8_t> bytes);

/// Blocking message I/O over a connected file descriptor (pipe end or socket).
class Channel {
public:
    Channel() = default;
    Channel(int read_fd, int write_fd, std::chrono::milliseconds timeout);
    ~Channel();
    Channel(Channel&& other) noexcept;
    Channel& operator=(Channel&& other) noexcept;
    Channel(const Channel&) = delete;
    Channel& operator=(const Channel&) = delete;

    void send(const Message& msg);
    Message receive();
    bool open() const noexcept { return read_fd_ >= 0; }
    void close();

private:
    void read_exact(std::uint8_t* dst, std::size_t n);
    void write_all(const std::uint8_t* src, std::size_t n);

    int read_fd_ = -1;
    int write_fd_ = -1;
    std::chrono::milliseconds timeout_{0};
};

/// Connects to an adapter: "stdio:<shell command>" spawns the command with
/// its stdin/stdout attached to the channel; "tcp:<host>:<port>" connects.
Channel connect(const std::string& endpoint, std::chrono::milliseconds timeout, int* child_pid);

struct RemoteCapabilities {
    int protocol = kProtocolVersion;
    bool deterministic = false;
    bool concurrent_safe = false;
    std::vector<int> max_shape;  // (K, C, H, W) limits, empty when unlimited
};

/// Denoiser running in another process behind the frame protocol.
class BridgeDenoiser final : public Denoiser {
public:
    explicit BridgeDenoiser(const std::string& endpoint,
                            std::chrono::milliseconds timeout = std::chrono::seconds(300));
    ~BridgeDenoiser() override;

    std::string name() const override { return "bridge"; }
    DenoiserCapabilities capabilities() const override;
    DenoisePrediction denoise(const DenoiseRequest& req) override;

    const RemoteCapabilities& remote() const noexcept { return remote_; }
    /// Sends BYE and waits for the adapter to exit.
    void shutdown();

private:
    RemoteCapabilities handshake();

    Channel channel_;
    int child_pid_ = -1;
    RemoteCapabilities remote_;
};

}  // namespace glcd::bridge
