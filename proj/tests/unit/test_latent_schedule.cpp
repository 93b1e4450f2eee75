// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "glcd/check.hpp"
#include "glcd/errors.hpp"
#include "glcd/schedule.hpp"
#include "helpers.hpp"

using namespace glcd;
using glcd::testing::random_latent;

TEST_SUITE("latent-core") {

TEST_CASE("latent video validates its shape and data") {
    CHECK_THROWS_AS(LatentVideo(Shape{0, 1, 1, 1}), ShapeError);
    CHECK_THROWS_AS(LatentVideo(Shape{2, 1, 1, 1}, std::vector<float>(3)), ShapeError);
    LatentVideo z(Shape{2, 3, 4, 5}, 1.5f);
    CHECK(z.size() == 120);
    CHECK(z.frame(1).size() == 60);
    z.at(1, 2, 3, 4) = 7.0f;
    CHECK(z.data().back() == 7.0f);
    CHECK(z.max_abs() == 7.0f);
    z.at(0, 0, 0, 0) = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(z.all_finite());
    CHECK_THROWS_AS(require_finite(z, "test"), NumericError);
}

TEST_CASE("channels-last conversion round trips") {
    const LatentVideo z = random_latent(Shape{3, 2, 4, 5}, 1);
    const auto thwc = to_channels_last(z);
    CHECK(thwc[((1 * 4 + 2) * 5 + 3) * 2 + 1] == z.at(1, 1, 2, 3));
    CHECK(from_channels_last(thwc, 3, 4, 5, 2) == z);
}

TEST_CASE("linear beta table") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012);
    CHECK(s.train_steps() == 1000);
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.alpha_bar(1) == doctest::Approx(1.0 - 0.00085).epsilon(1e-15));
    double ab = 1.0;
    for (int i = 1; i <= 1000; ++i) ab *= 1.0 - (0.00085 + (0.012 - 0.00085) * (i - 1) / 999.0);
    CHECK(s.alpha_bar(1000) == doctest::Approx(ab).epsilon(1e-12));
    for (int t = 1; t <= 1000; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK_THROWS_AS(alpha_schedule(10, 0.02, 0.01), ParameterError);
}

TEST_CASE("strided visiting order ends at zero") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012).strided(5);
    CHECK(s.timesteps() == std::vector<int>{1000, 800, 600, 400, 200});
    CHECK(s.target(0) == 800);
    CHECK(s.target(4) == 0);
    CHECK(s.num_steps() == 5);
    CHECK_THROWS_AS(alpha_schedule(100, 0.001, 0.01).strided(101), ScheduleError);
    CHECK_THROWS_AS(DenoiseSchedule({1.0, 0.9, 0.95}, {2, 1}), ScheduleError);
}

TEST_CASE("ddim step matches the double-precision update") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012).strided(20);
    const LatentVideo z = random_latent(Shape{2, 2, 3, 3}, 2);
    const LatentVideo eps = random_latent(Shape{2, 2, 3, 3}, 3);
    for (int i = 0; i < s.num_steps(); ++i) {
        const int t = s.timesteps()[static_cast<std::size_t>(i)];
        const int to = s.target(i);
        const LatentVideo out = ddim_step(z, DenoisePrediction{eps, t}, t, to, s);
        const auto ref = check::ddim_step_f64(z, eps, s.alpha_bar(t), s.alpha_bar(to));
        for (std::size_t e = 0; e < ref.size(); ++e) CHECK(out.data()[e] == doctest::Approx(ref[e]).epsilon(1e-5));
    }
}

TEST_CASE("ddim step to t = 0 returns the clean estimate") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012).strided(10);
    const LatentVideo z = random_latent(Shape{1, 1, 2, 2}, 4);
    const LatentVideo eps = random_latent(Shape{1, 1, 2, 2}, 5);
    const LatentVideo a = ddim_step(z, DenoisePrediction{eps, 100}, 100, 0, s);
    const LatentVideo b = predict_z0(z, DenoisePrediction{eps, 100}, 100, s);
    CHECK(glcd::testing::max_abs_diff(a.data(), b.data()) < 1e-5);
}

TEST_CASE("zero noise prediction scales by the alpha ratio") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012);
    const LatentVideo z(Shape{1, 1, 1, 1}, 2.0f);
    const LatentVideo out = ddim_step(z, DenoisePrediction{LatentVideo(z.shape()), 500}, 500, 250, s);
    CHECK(out.data()[0] == doctest::Approx(2.0 * std::sqrt(s.alpha_bar(250) / s.alpha_bar(500))).epsilon(1e-6));
}

TEST_CASE("renoise inverts predict_z0") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012);
    const LatentVideo z = random_latent(Shape{2, 1, 3, 3}, 6);
    const LatentVideo eps = random_latent(Shape{2, 1, 3, 3}, 7);
    const LatentVideo z0 = predict_z0(z, DenoisePrediction{eps, 300}, 300, s);
    CHECK(glcd::testing::max_abs_diff(renoise(z0, eps, 300, s).data(), z.data()) < 1e-5);
}

TEST_CASE("ddim step rejects bad inputs") {
    const DenoiseSchedule s = alpha_schedule(1000, 0.00085, 0.012);
    const LatentVideo z(Shape{1, 1, 2, 2});
    CHECK_THROWS_AS(ddim_step(z, DenoisePrediction{LatentVideo(Shape{1, 1, 2, 3}), 10}, 10, 0, s), ShapeError);
    CHECK_THROWS_AS(ddim_step(z, DenoisePrediction{LatentVideo(z.shape()), 10}, 10, 20, s), ScheduleError);
    CHECK_THROWS_AS(ddim_step(z, DenoisePrediction{LatentVideo(z.shape()), 10}, 2000, 0, s), ScheduleError);
}

}
