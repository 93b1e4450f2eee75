// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <netinet/in.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <thread>

#include "glcd/bridge.hpp"
#include "glcd/errors.hpp"
#include "glcd/pipeline.hpp"
#include "helpers.hpp"

using namespace glcd;
using namespace glcd::bridge;
using glcd::testing::bitwise_equal;
using glcd::testing::random_latent;

namespace {

const std::string kAdapter = GLCD_ADAPTER_PATH;

std::string stdio(const std::string& args) {
    return "stdio:" + kAdapter + " " + args;
}

DenoiseRequest request(LatentVideo clip, int t) {
    DenoiseRequest r;
    r.clip = std::move(clip);
    r.t = t;
    r.conditioning = "a red kite";
    return r;
}

int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

}  // namespace

TEST_SUITE("bridge") {

TEST_CASE("frame header layout") {
    const FrameHeader h{MsgType::DenoiseResp, 0x00020304u, 0x000000000b0c0d0eull};
    const auto b = encode_header(h);
    const std::array<std::uint8_t, 16> want{3, 0, 0, 0, 4, 3, 2, 0, 0x0e, 0x0d, 0x0c, 0x0b, 0, 0, 0, 0};
    CHECK(b == want);
    const FrameHeader back = decode_header(b);
    CHECK(back.type == h.type);
    CHECK(back.json_len == h.json_len);
    CHECK(back.payload_len == h.payload_len);

    auto bad = b;
    bad[0] = 9;
    CHECK_THROWS_AS(decode_header(bad), FormatError);
    auto huge = encode_header(FrameHeader{MsgType::Hello, kMaxJsonBytes + 1, 0});
    CHECK_THROWS_AS(decode_header(huge), FormatError);
}

TEST_CASE("f32 payload codec") {
    const std::vector<float> v{1.0f, -2.5f, 0.0f, std::nextafter(0.0f, 1.0f)};
    const auto bytes = encode_f32(v);
    REQUIRE(bytes.size() == 16u);
    CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4) == std::vector<std::uint8_t>{0, 0, 0x80, 0x3f});
    CHECK(std::vector<std::uint8_t>(bytes.begin() + 4, bytes.begin() + 8) == std::vector<std::uint8_t>{0, 0, 0x20, 0xc0});
    CHECK(decode_f32(bytes) == v);
    const std::vector<std::uint8_t> odd(5, 0);
    CHECK_THROWS_AS(decode_f32(odd), FormatError);
}

TEST_CASE("echo adapter returns the clip bit for bit") {
    BridgeDenoiser d(stdio("--mode echo"));
    CHECK(d.remote().deterministic);
    CHECK(d.capabilities().deterministic);
    CHECK_FALSE(d.capabilities().concurrent_safe);
    LatentVideo clip = random_latent(Shape{3, 2, 4, 4}, 1);
    clip.data()[0] = -0.0f;
    clip.data()[1] = std::numeric_limits<float>::denorm_min();
    const DenoisePrediction p = d.denoise(request(clip, 321));
    CHECK(p.t == 321);
    CHECK(bitwise_equal(p.eps, clip));
}

TEST_CASE("zero adapter through the pipeline equals the in-process zero denoiser") {
    PipelineConfig c;
    c.frames = 10;
    c.channels = 2;
    c.height = 4;
    c.width = 4;
    c.clip_length = 4;
    c.steps = 4;
    c.seed = 5;
    ZeroDenoiser local;
    BridgeDenoiser remote(stdio("--mode zero"));
    const RunResult a = run(c, local);
    const RunResult b = run(c, remote);
    CHECK(bitwise_equal(a.z0, b.z0));
    CHECK(reports_csv(a.reports) == reports_csv(b.reports));

    c.denoiser = "bridge";
    c.bridge_endpoint = stdio("--mode zero");
    auto made = make_denoiser(c, make_schedule(c));
    CHECK(made->name() == "bridge");
    CHECK(bitwise_equal(run(c, *made).z0, a.z0));
}

TEST_CASE("adapter errors surface as denoiser errors with the remote trace") {
    BridgeDenoiser d(stdio("--mode error"));
    CHECK_THROWS_WITH_AS(d.denoise(request(LatentVideo(Shape{1, 1, 2, 2}), 10)),
                         doctest::Contains("REMOTE"), DenoiserError);
    CHECK_THROWS_WITH_AS(d.denoise(request(LatentVideo(Shape{1, 1, 2, 2}), 10)),
                         doctest::Contains("loopback_adapter"), DenoiserError);

    PipelineConfig c;
    c.frames = 6;
    c.clip_length = 3;
    c.steps = 2;
    try {
        run(c, d);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.partial_reports().empty());
        CHECK(std::string(e.what()).find("REMOTE") != std::string::npos);
    }
}

TEST_CASE("version mismatch is refused") {
    int pid = -1;
    Channel ch = connect(stdio("--mode zero"), std::chrono::seconds(10), &pid);
    ch.send(Message{MsgType::Hello, {{"protocol", 2}}, {}});
    const Message reply = ch.receive();
    CHECK(reply.type == MsgType::Error);
    CHECK(reply.body.value("code", std::string()) == "VERSION");
    ch.close();
    int status = 0;
    ::waitpid(pid, &status, 0);
}

TEST_CASE("oversize shapes are refused") {
    BridgeDenoiser d(stdio("--mode echo --max-shape 4,4,8,8"));
    CHECK(d.remote().max_shape == std::vector<int>{4, 4, 8, 8});
    CHECK_NOTHROW(d.denoise(request(LatentVideo(Shape{4, 4, 8, 8}), 1)));
    CHECK_THROWS_AS(d.denoise(request(LatentVideo(Shape{5, 4, 8, 8}), 1)), DenoiserError);

    int pid = -1;
    Channel ch = connect(stdio("--mode echo --max-shape 4,4,8,8"), std::chrono::seconds(10), &pid);
    ch.send(Message{MsgType::Hello, {{"protocol", 1}}, {}});
    CHECK(ch.receive().type == MsgType::Hello);
    const LatentVideo big(Shape{1, 1, 9, 1});
    ch.send(Message{MsgType::DenoiseReq, {{"shape", {1, 1, 9, 1}}, {"dtype", "f32le"}, {"timestep", 1}},
                    encode_f32(big.data())});
    const Message reply = ch.receive();
    CHECK(reply.type == MsgType::Error);
    CHECK(reply.body.value("code", std::string()) == "SHAPE");
    ch.send(Message{MsgType::Bye, nlohmann::json::object(), {}});
    int status = -1;
    ::waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("bye shuts the adapter down cleanly") {
    int pid = -1;
    Channel ch = connect(stdio("--mode zero"), std::chrono::seconds(10), &pid);
    ch.send(Message{MsgType::Hello, {{"protocol", 1}}, {}});
    CHECK(ch.receive().type == MsgType::Hello);
    ch.send(Message{MsgType::Bye, nlohmann::json::object(), {}});
    int status = -1;
    ::waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("tcp transport") {
    const int port = free_port();
    const std::string port_s = std::to_string(port);
    char* argv[] = {const_cast<char*>(kAdapter.c_str()), const_cast<char*>("--mode"), const_cast<char*>("echo"),
                    const_cast<char*>("--listen"), const_cast<char*>(port_s.c_str()), nullptr};
    pid_t pid = -1;
    REQUIRE(::posix_spawn(&pid, kAdapter.c_str(), nullptr, nullptr, argv, environ) == 0);
    std::unique_ptr<BridgeDenoiser> d;
    for (int attempt = 0; attempt < 100 && !d; ++attempt) {
        try {
            d = std::make_unique<BridgeDenoiser>("tcp:127.0.0.1:" + port_s, std::chrono::seconds(10));
        } catch (const DenoiserError&) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    REQUIRE(d);
    const LatentVideo clip = random_latent(Shape{2, 3, 2, 2}, 4);
    CHECK(bitwise_equal(d->denoise(request(clip, 7)).eps, clip));
    d->shutdown();
    int status = -1;
    ::waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}

TEST_CASE("echo adapter survives 1000 sequential requests") {
    BridgeDenoiser d(stdio("--mode echo"));
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const LatentVideo clip = random_latent(Shape{2, 2, 3, 3}, static_cast<std::uint64_t>(i));
        if (!bitwise_equal(d.denoise(request(clip, i % 1000 + 1)).eps, clip)) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("bad endpoints") {
    CHECK_THROWS_AS(BridgeDenoiser("http://x"), ConfigError);
    CHECK_THROWS_AS(BridgeDenoiser("tcp:localhost"), ConfigError);
    CHECK_THROWS_AS(BridgeDenoiser("stdio:/nonexistent/adapter", std::chrono::seconds(5)), DenoiserError);
}

}
