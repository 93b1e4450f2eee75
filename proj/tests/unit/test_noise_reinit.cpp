// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "glcd/check.hpp"
#include "glcd/errors.hpp"
#include "glcd/fft.hpp"
#include "glcd/noise_reinit.hpp"
#include "helpers.hpp"

using namespace glcd;
using glcd::testing::max_abs_diff;
using glcd::testing::random_latent;

namespace {

std::vector<std::vector<float>> frames_of(const LatentVideo& z, int start, int n) {
    std::vector<std::vector<float>> out;
    for (int k = start; k < start + n; ++k) out.emplace_back(z.frame(k).begin(), z.frame(k).end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_SUITE("noise-reinit") {

TEST_CASE("filter kinds parse and print") {
    for (auto k : {FilterKind::GaussianLP, FilterKind::IdealBoxLP, FilterKind::AllPass, FilterKind::AllStop}) {
        CHECK(parse_filter_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_filter_kind("lanczos"), ParameterError);
}

TEST_CASE("normalised frequency folds negative bins") {
    CHECK(normalized_frequency(0, 8) == 0.0);
    CHECK(normalized_frequency(1, 8) == 0.125);
    CHECK(normalized_frequency(7, 8) == 0.125);
    CHECK(normalized_frequency(4, 8) == 0.5);
}

TEST_CASE("all-pass and all-stop masks") {
    const auto pass = make_lpf(4, 3, 5, FilterKind::AllPass, 0.25);
    const auto stop = make_lpf(4, 3, 5, FilterKind::AllStop, 0.25);
    for (float v : pass.mask()) CHECK(v == 1.0f);
    for (float v : stop.mask()) CHECK(v == 0.0f);
}

TEST_CASE("gaussian mask is one at DC and follows the radius formula") {
    const auto h = make_lpf(8, 6, 5, FilterKind::GaussianLP, 0.25);
    CHECK(h.at(0, 0, 0) == 1.0f);
    for (int k = 0; k < 8; ++k)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 5; ++x) {
                const double fk = std::min(k, 8 - k) / 8.0, fy = std::min(y, 6 - y) / 6.0, fx = std::min(x, 5 - x) / 5.0;
                const double want = std::exp(-(fk * fk + fy * fy + fx * fx) / (2 * 0.25 * 0.25));
                CHECK(h.at(k, y, x) == doctest::Approx(want).epsilon(1e-6));
            }
    CHECK(h.conjugate_symmetric());
}

TEST_CASE("box mask keeps bins 0, +-1, +-2 of an 8-point axis at cutoff 0.25") {
    const auto h = make_lpf(8, 1, 1, FilterKind::IdealBoxLP, 0.25);
    std::vector<float> got;
    for (int k = 0; k < 8; ++k) got.push_back(h.at(k, 0, 0));
    CHECK(got == std::vector<float>{1, 1, 1, 0, 0, 0, 1, 1});
    CHECK(make_lpf(7, 4, 6, FilterKind::IdealBoxLP, 0.3).conjugate_symmetric());
}

TEST_CASE("filter validation") {
    CHECK_THROWS_AS(make_lpf(4, 4, 4, FilterKind::GaussianLP, 0.0), ParameterError);
    CHECK_THROWS_AS(make_lpf(4, 4, 4, FilterKind::GaussianLP, 0.6), ParameterError);
    CHECK_THROWS_AS(FrequencyFilter(2, 1, 1, {0.5f, 1.5f}, FilterKind::GaussianLP, 0.25), ParameterError);
    CHECK_THROWS_AS(FrequencyFilter(2, 1, 1, {0.5f}, FilterKind::GaussianLP, 0.25), ShapeError);
}

TEST_CASE("fft round trip on random tensors up to 16x16x16") {
    for (auto [d0, d1, d2] : std::vector<std::array<int, 3>>{{16, 16, 16}, {5, 7, 3}, {1, 1, 9}, {16, 4, 16}}) {
        const LatentVideo x = random_latent(Shape{1, 1, 1, d0 * d1 * d2}, static_cast<std::uint64_t>(d0 * 131 + d1));
        float imag = 0.0f;
        const auto back = fft::inverse3d_real(fft::forward3d(x.data(), d0, d1, d2), d0, d1, d2, imag);
        CHECK(max_abs_diff(back, x.data()) <= 1e-5);
        CHECK(imag <= 1e-5f);
    }
}

TEST_CASE("fft forward matches the naive transform") {
    const LatentVideo x = random_latent(Shape{1, 1, 1, 60}, 3);
    const auto fast = fft::forward3d(x.data(), 3, 4, 5);
    std::vector<check::cdouble> in(x.data().begin(), x.data().end());
    const auto ref = check::naive_dft(in, {3, 4, 5}, false);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(check::cdouble(fast[i]) - ref[i]) < 1e-4);
}

TEST_CASE("frequency fusion identities") {
    const LatentVideo z = random_latent(Shape{6, 2, 5, 4}, 10);
    const LatentVideo eta = random_latent(Shape{6, 2, 5, 4}, 11);
    CHECK(max_abs_diff(frequency_fuse(z, eta, make_lpf(6, 5, 4, FilterKind::AllPass, 0.25)).data(), z.data()) <= 1e-5);
    CHECK(max_abs_diff(frequency_fuse(z, eta, make_lpf(6, 5, 4, FilterKind::AllStop, 0.25)).data(), eta.data()) <= 1e-5);
    for (auto kind : {FilterKind::GaussianLP, FilterKind::IdealBoxLP}) {
        CHECK(max_abs_diff(frequency_fuse(z, z, make_lpf(6, 5, 4, kind, 0.2)).data(), z.data()) <= 1e-5);
    }
}

TEST_CASE("frequency fusion is linear in its inputs") {
    const Shape s{4, 1, 6, 6};
    const LatentVideo a = random_latent(s, 1), b = random_latent(s, 2), eta = random_latent(s, 3);
    LatentVideo ab(s);
    for (std::size_t e = 0; e < ab.size(); ++e) ab.data()[e] = a.data()[e] + b.data()[e];
    const auto h = make_lpf(4, 6, 6, FilterKind::GaussianLP, 0.25);
    const LatentVideo lhs = frequency_fuse(ab, eta, h);
    const LatentVideo r1 = frequency_fuse(a, LatentVideo(s), h);
    const LatentVideo r2 = frequency_fuse(b, eta, h);
    for (std::size_t e = 0; e < lhs.size(); ++e) CHECK(std::abs(lhs.data()[e] - (r1.data()[e] + r2.data()[e])) <= 1e-5);
}

TEST_CASE("frequency fusion matches the per-bin oracle") {
    const Shape s{5, 2, 4, 6};
    const LatentVideo z = random_latent(s, 20), eta = random_latent(s, 21);
    const auto h = make_lpf(5, 4, 6, FilterKind::GaussianLP, 0.15);
    const LatentVideo got = frequency_fuse(z, eta, h);
    const auto ref = check::spectral_split(z, eta, h);
    for (std::size_t e = 0; e < ref.size(); ++e) CHECK(std::abs(got.data()[e] - ref[e]) <= 1e-5);
}

TEST_CASE("an asymmetric mask is rejected") {
    std::vector<float> mask(8, 0.0f);
    mask[1] = 1.0f;  // bin +1 without bin -1
    const FrequencyFilter h(8, 1, 1, mask, FilterKind::GaussianLP, 0.25);
    CHECK_FALSE(h.conjugate_symmetric());
    const LatentVideo z = random_latent(Shape{8, 1, 1, 1}, 5);
    CHECK_THROWS_AS(frequency_fuse(z, LatentVideo(z.shape()), h), FilterSymmetryError);
}

TEST_CASE("frequency fusion checks shapes") {
    const LatentVideo z(Shape{4, 1, 2, 2});
    CHECK_THROWS_AS(frequency_fuse(z, LatentVideo(Shape{4, 1, 2, 3}), make_lpf(4, 2, 2, FilterKind::AllPass, 0.25)),
                    ShapeError);
    CHECK_THROWS_AS(frequency_fuse(z, z, make_lpf(4, 2, 3, FilterKind::AllPass, 0.25)), ShapeError);
}

TEST_CASE("window of one tiles the unit frame") {
    const NoiseInit init = make_noise_init(7, Shape{5, 2, 3, 3}, 1);
    const LatentVideo z = local_noise_shuffle(init, 5);
    for (int k = 0; k < 5; ++k) CHECK(max_abs_diff(z.frame(k), init.eps_unit.frame(0)) == 0.0);
}

TEST_CASE("full-length window permutes the unit") {
    const NoiseInit init = make_noise_init(8, Shape{6, 1, 2, 2}, 6);
    const LatentVideo z = local_noise_shuffle(init, 6);
    CHECK(frames_of(z, 0, 6) == frames_of(init.eps_unit, 0, 6));
}

TEST_CASE("each window holds a permutation of the unit") {
    const NoiseInit init = make_noise_init(9, Shape{11, 1, 2, 2}, 4);
    const LatentVideo z = local_noise_shuffle(init, 11);
    CHECK(frames_of(z, 0, 4) == frames_of(init.eps_unit, 0, 4));
    CHECK(frames_of(z, 4, 4) == frames_of(init.eps_unit, 0, 4));
    // The trailing partial window draws from the unit's frames.
    for (int k = 8; k < 11; ++k) {
        bool found = false;
        for (int u = 0; u < 4; ++u) found = found || max_abs_diff(z.frame(k), init.eps_unit.frame(u)) == 0.0;
        CHECK(found);
    }
}

TEST_CASE("noise sources are seeded and independent") {
    const NoiseInit a = make_noise_init(10, Shape{4, 1, 3, 3}, 4);
    const NoiseInit b = make_noise_init(10, Shape{4, 1, 3, 3}, 4);
    CHECK(a.eps_unit == b.eps_unit);
    CHECK(a.eta == b.eta);
    CHECK(local_noise_shuffle(a, 4) == local_noise_shuffle(b, 4));
    CHECK_FALSE(a.eps_unit == a.eta);
    CHECK_FALSE(make_noise_init(11, Shape{4, 1, 3, 3}, 4).eta == a.eta);
    CHECK_THROWS_AS(make_noise_init(1, Shape{4, 1, 1, 1}, 0), ParameterError);
}

TEST_CASE("gaussian latents have unit moments") {
    const LatentVideo z = gaussian_latent(Shape{16, 4, 16, 16}, 3);
    double m = 0.0, v = 0.0;
    for (float x : z.data()) m += x;
    m /= static_cast<double>(z.size());
    for (float x : z.data()) v += (x - m) * (x - m);
    v /= static_cast<double>(z.size());
    CHECK(std::abs(m) < 0.02);
    CHECK(std::abs(v - 1.0) < 0.03);
}

}
