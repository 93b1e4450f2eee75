// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstring>
#include <random>

#include "glcd/latent.hpp"

namespace glcd::testing {

inline LatentVideo random_latent(Shape s, std::uint64_t seed, float scale = 1.0f) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n(0.0f, scale);
    LatentVideo z(s);
    for (float& v : z.data()) v = n(rng);
    return z;
}

inline bool bitwise_equal(const LatentVideo& a, const LatentVideo& b) {
    return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

/// Scalar-per-frame video with frames[k] filling frame k.
inline LatentVideo scalar_frames(const std::vector<float>& frames, Shape frame_shape = {1, 1, 1, 1}) {
    LatentVideo z(frame_shape.with_frames(static_cast<int>(frames.size())));
    for (int k = 0; k < z.frames(); ++k)
        for (float& v : z.frame(k)) v = frames[static_cast<std::size_t>(k)];
    return z;
}

}  // namespace glcd::testing
