// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/latent.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {

std::string Shape::str() const {
    return fmt::format("({}, {}, {}, {})", frames, channels, height, width);
}

LatentVideo::LatentVideo(Shape shape, float fill) : shape_(shape) {
    if (shape.frames < 1 || shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw ShapeError(fmt::format("latent extents must be positive, got {}", shape.str()));
    }
    data_.assign(shape.size(), fill);
}

LatentVideo::LatentVideo(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (shape.frames < 1 || shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw ShapeError(fmt::format("latent extents must be positive, got {}", shape.str()));
    }
    if (data_.size() != shape.size()) {
        throw ShapeError(fmt::format("buffer of {} values does not match shape {}", data_.size(), shape.str()));
    }
}

std::span<float> LatentVideo::frame(int k) {
    return std::span<float>(data_).subspan(static_cast<std::size_t>(k) * shape_.frame_size(), shape_.frame_size());
}

std::span<const float> LatentVideo::frame(int k) const {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(k) * shape_.frame_size(),
                                                 shape_.frame_size());
}

bool LatentVideo::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float LatentVideo::max_abs() const noexcept {
    float m = 0.0f;
    for (float v : data_) m = std::max(m, std::abs(v));
    return m;
}

void require_same_shape(const LatentVideo& a, const LatentVideo& b, const char* context) {
    if (a.shape() != b.shape()) {
        throw ShapeError(fmt::format("{}: shape mismatch {} vs {}", context, a.shape().str(), b.shape().str()));
    }
}

void require_finite(const LatentVideo& z, const char* context) {
    if (!z.all_finite()) {
        throw NumericError(fmt::format("{}: non-finite value in latent of shape {}", context, z.shape().str()));
    }
}

LatentVideo from_channels_last(std::span<const float> thwc, int frames, int height, int width, int channels) {
    LatentVideo z(Shape{frames, channels, height, width});
    if (thwc.size() != z.size()) {
        throw ShapeError("channels-last buffer size does not match extents");
    }
    std::size_t i = 0;
    for (int k = 0; k < frames; ++k)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < channels; ++c) z.at(k, c, y, x) = thwc[i++];
    return z;
}

std::vector<float> to_channels_last(const LatentVideo& z) {
    std::vector<float> out(z.size());
    std::size_t i = 0;
    for (int k = 0; k < z.frames(); ++k)
        for (int y = 0; y < z.height(); ++y)
            for (int x = 0; x < z.width(); ++x)
                for (int c = 0; c < z.channels(); ++c) out[i++] = z.at(k, c, y, x);
    return out;
}

}  // namespace glcd
