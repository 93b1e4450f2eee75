// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace glcd {

/// Extents of a latent video, frames-major: (frames, channels, height, width).
struct Shape {
    int frames = 0;
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t frame_size() const noexcept {
        return static_cast<std::size_t>(channels) * height * width;
    }
    std::size_t size() const noexcept { return frame_size() * frames; }
    Shape with_frames(int k) const noexcept { return {k, channels, height, width}; }
    std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense float32 latent tensor with (K, C, H, W) layout.
///
/// Elements are stored contiguously so that one frame is a contiguous span of
/// C*H*W values; windowing along the frame axis never copies more than needed.
class LatentVideo {
public:
    LatentVideo() = default;
    explicit LatentVideo(Shape shape, float fill = 0.0f);
    LatentVideo(Shape shape, std::vector<float> data);

    const Shape& shape() const noexcept { return shape_; }
    int frames() const noexcept { return shape_.frames; }
    int channels() const noexcept { return shape_.channels; }
    int height() const noexcept { return shape_.height; }
    int width() const noexcept { return shape_.width; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    const std::vector<float>& values() const noexcept { return data_; }

    std::span<float> frame(int k);
    std::span<const float> frame(int k) const;

    float& at(int k, int c, int y, int x) noexcept { return data_[offset(k, c, y, x)]; }
    float at(int k, int c, int y, int x) const noexcept { return data_[offset(k, c, y, x)]; }

    std::size_t offset(int k, int c, int y, int x) const noexcept {
        return ((static_cast<std::size_t>(k) * shape_.channels + c) * shape_.height + y) * shape_.width + x;
    }

    bool all_finite() const noexcept;
    float max_abs() const noexcept;

    friend bool operator==(const LatentVideo&, const LatentVideo&) = default;

private:
    Shape shape_{};
    std::vector<float> data_;
};

/// Throws ShapeError unless `a` and `b` have identical shapes.
void require_same_shape(const LatentVideo& a, const LatentVideo& b, const char* context);
/// Throws NumericError if any element is NaN or infinite.
void require_finite(const LatentVideo& z, const char* context);

/// Converts a (t, h, w, c) channels-last buffer into the frames-major layout.
LatentVideo from_channels_last(std::span<const float> thwc, int frames, int height, int width, int channels);
std::vector<float> to_channels_last(const LatentVideo& z);

}  // namespace glcd
