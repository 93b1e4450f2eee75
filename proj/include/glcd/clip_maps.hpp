// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "glcd/latent.hpp"

namespace glcd {

enum class PathKind { Global, Local };
std::string_view to_string(PathKind path);

enum class PadMode { Replicate };

/// Virtual padding of the frame axis. Padded index p maps onto real frame
/// clamp(p - left, 0, K - 1).
struct PadSpec {
    int left = 0;
    int right = 0;
    PadMode mode = PadMode::Replicate;
};

/// Index map F_i selecting L frames from the (virtually padded) latent.
struct ClipMap {
    std::vector<int> indices;
    PathKind path = PathKind::Global;
    int clip_id = 0;
    int real_frames = 0;  // K of the unpadded latent
    PadSpec pad{};
    int shift = 0;        // local maps: s^t used to build this window

    int length() const noexcept { return static_cast<int>(indices.size()); }
    int padded_frames() const noexcept { return real_frames + pad.left + pad.right; }
    /// Real frame backing padded index `indices[j]`.
    int source_frame(int j) const;
    /// False for padding positions.
    bool is_real(int j) const;
};

/// Per-frame clip weights W_i; every value >= 0 and at least one > 0.
class WeightProfile {
public:
    explicit WeightProfile(std::vector<float> values);
    const std::vector<float>& values() const noexcept { return values_; }
    float operator[](std::size_t j) const noexcept { return values_[j]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<float> values_;
};

enum class WeightKind { Uniform, Triangular };

/// Uniform: all ones. Triangular: w_j = (min(j, L-1-j) * 2 + 1) / L, a
/// symmetric ramp with endpoints 1/L (L = 4 gives 0.25, 0.75, 0.75, 0.25).
WeightProfile clip_weights(int length, WeightKind kind);

/// Per-timestep temporal shift of the local windows, s^t in [0, stride).
struct ShiftPlan {
    std::uint64_t seed = 0;
    bool per_clip = false;

    /// Deterministic in (seed, t, clip); clip is ignored unless per_clip.
    int shift(int t, int stride, int clip = 0) const;
};

/// N = d dilated maps with offsets s_i = i and indices s_i + d*j. The frame
/// axis is right-padded (replicating the last frame) far enough for the last
/// map; errors if d*L < K (frames left uncovered), if d > K, or if the padded
/// extent exceeds `max_padded_frames`.
std::vector<ClipMap> make_global_maps(int frames, int length, int dilation, int max_padded_frames = 1 << 16);

/// Consecutive windows of length L whose starts follow the grid
/// {0, stride, 2*stride, ...} <= K - L offset by the shift for timestep t,
/// clamped into [0, K - L]; starts 0 and K - L are always present. The
/// result is sorted and duplicate free, and the windows cover every frame.
std::vector<ClipMap> make_local_maps(int frames, int length, int stride, int t, const ShiftPlan& plan);

/// Clip with frame j = padded(z)[map.indices[j]].
LatentVideo gather(const LatentVideo& z, const ClipMap& map);

/// num[f] += w_j * clip[j] and den[f] += w_j for each clip frame j, with
/// padding positions folded onto the real frame they replicate.
void scatter_accumulate(LatentVideo& num, std::span<float> den, const LatentVideo& clip, const ClipMap& map,
                        const WeightProfile& w);

}  // namespace glcd
