// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <random>

#include "glcd/config.hpp"
#include "glcd/io.hpp"

using namespace glcd;

TEST_SUITE("config") {

TEST_CASE("empty document yields the defaults") {
    const PipelineConfig c = parse_config("");
    CHECK(c == PipelineConfig{});
    CHECK(c.gamma0 == 0.005);
    CHECK(c.beta_anneal == 0.0005);
    CHECK(c.lambda_anchor == 0.1);
    CHECK(c.vmcr.lambda_f == 0.2);
    CHECK(c.vmcr.lambda_mse == 0.001);
    CHECK(c.vmcr.lambda_phase == 1.0);
    CHECK(c.vmcr.omega_motion == 2e-5);
    CHECK(c.vmcr.n_iters == 1);
    CHECK(parse_config("# only a comment\n") == PipelineConfig{});
}

TEST_CASE("values are read by key") {
    const PipelineConfig c = parse_config(
        "frames: 16\nclip_length: 4\ngamma_override: 0.25\nweight_profile: triangular\nfilter: box\n"
        "denoiser: toy_attention\nconditioning: \"a cat: on a mat\"\nenable_vmcr: false\nseed: 18446744073709551615\n");
    CHECK(c.frames == 16);
    CHECK(c.clip_length == 4);
    CHECK(c.gamma_override == 0.25);
    CHECK(c.weight_profile == WeightKind::Triangular);
    CHECK(c.filter_kind == FilterKind::IdealBoxLP);
    CHECK(c.denoiser == "toy_attention");
    CHECK(c.conditioning == "a cat: on a mat");
    CHECK_FALSE(c.enable_vmcr);
    CHECK(c.seed == 18446744073709551615ull);
    CHECK_FALSE(parse_config("gamma_override: null\n").gamma_override.has_value());
}

TEST_CASE("invalid values name their key") {
    CHECK_THROWS_WITH_AS(parse_config("gamma0: 2.0\n"), doctest::Contains("gamma0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("gamma0: 0\n"), doctest::Contains("gamma0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("frames: many\n"), doctest::Contains("frames"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("filter: sinc\n"), doctest::Contains("filter"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("weight_profile: cosine\n"), doctest::Contains("weight_profile"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("denoiser: bridge\n"), doctest::Contains("bridge_endpoint"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("steps: [1, 2]\n"), doctest::Contains("steps"), ConfigError);
}

TEST_CASE("unknown keys are rejected with their line") {
    CHECK_THROWS_WITH_AS(parse_config("frames: 8\n\ngamma: 0.1\n"), doctest::Contains("'gamma' at line 3"), ConfigError);
}

TEST_CASE("parse errors report the line") {
    CHECK_THROWS_WITH_AS(parse_config("frames: 8\nsteps: [1, 2\n"), doctest::Contains("line"), ConfigError);
    CHECK_THROWS_AS(parse_config("- 1\n- 2\n"), ConfigError);
}

TEST_CASE("dump and parse round trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        PipelineConfig c;
        c.frames = 10 + static_cast<int>(rng() % 20);
        c.clip_length = 1 + static_cast<int>(rng() % 8);
        c.seed = rng();
        c.gamma0 = std::nextafter(u(rng), 1.0) * 0.999 + 1e-9;
        c.beta_anneal = u(rng) * 1e-3;
        if (i % 2 == 0) c.gamma_override = u(rng);
        c.filter_cutoff = 0.5 * (1.0 - u(rng) * 0.9);
        c.vmcr.omega_motion = u(rng) * 3.0;
        c.vmcr.eps_guard = 1e-12 + u(rng);
        c.weight_profile = i % 3 == 0 ? WeightKind::Triangular : WeightKind::Uniform;
        c.filter_kind = static_cast<FilterKind>(i % 4);
        c.conditioning = i % 5 == 0 ? "quote \" and: colon\nnewline" : "";
        c.enable_vmcr = i % 2 == 1;
        CAPTURE(i);
        CHECK(parse_config(dump_config(c)) == c);
    }
}

TEST_CASE("save then load reproduces the file") {
    const auto dir = std::filesystem::temp_directory_path() / "glcd_config_test";
    std::filesystem::create_directories(dir);
    PipelineConfig c;
    c.frames = 33;
    c.threads = 3;
    c.gamma_override = 0.125;
    save_config((dir / "a.yaml").string(), c);
    CHECK(load_config((dir / "a.yaml").string()) == c);
    save_config((dir / "b.yaml").string(), load_config((dir / "a.yaml").string()));
    CHECK(read_file(dir / "a.yaml") == read_file(dir / "b.yaml"));
    CHECK_THROWS_AS(load_config((dir / "missing.yaml").string()), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("every config field is dumped") {
    const std::string text = dump_config(PipelineConfig{});
    for (const auto& k : config_keys()) CHECK(text.find(k + ": ") != std::string::npos);
}

}
