// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "glcd/latent.hpp"

namespace glcd {

enum class FilterKind { GaussianLP, IdealBoxLP, AllPass, AllStop };
std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);

/// Spatio-temporal low-pass mask over the (frames, height, width) FFT grid,
/// broadcast across channels. Values lie in [0, 1].
class FrequencyFilter {
public:
    FrequencyFilter(int frames, int height, int width, std::vector<float> mask, FilterKind kind, double cutoff);

    int frames() const noexcept { return frames_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    FilterKind kind() const noexcept { return kind_; }
    double cutoff() const noexcept { return cutoff_; }
    const std::vector<float>& mask() const noexcept { return mask_; }
    float at(int k, int y, int x) const noexcept {
        return mask_[(static_cast<std::size_t>(k) * height_ + y) * width_ + x];
    }

    /// H(k) == H(-k) for every bin, so fusing real inputs stays real.
    bool conjugate_symmetric() const noexcept;

private:
    int frames_, height_, width_;
    std::vector<float> mask_;
    FilterKind kind_;
    double cutoff_;
};

/// |normalised frequency| of bin i on an n-point axis: min(i, n - i) / n.
double normalized_frequency(int bin, int n);

/// GaussianLP: exp(-|f|^2 / (2 cutoff^2)) over the 3-D normalised radius.
/// IdealBoxLP: 1 where max(|f_k|, |f_y|, |f_x|) <= cutoff. cutoff in (0, 0.5].
FrequencyFilter make_lpf(int frames, int height, int width, FilterKind kind, double cutoff);

/// Seeded noise sources for the initial latent.
struct NoiseInit {
    LatentVideo eps_unit;  // shuffle_window frames of N(0, I)
    LatentVideo eta;       // K frames of N(0, I)
    std::uint64_t seed = 0;
    int shuffle_window = 1;
};

/// Standard normal tensor drawn from a 64-bit seed.
LatentVideo gaussian_latent(Shape shape, std::uint64_t seed);

/// Draws eps_unit and eta from independent sub-seeds of `seed`.
NoiseInit make_noise_init(std::uint64_t seed, Shape full, int shuffle_window);

/// Tiles eps_unit over K frames and applies an independent seeded
/// permutation of frame order inside each consecutive shuffle window.
LatentVideo local_noise_shuffle(const NoiseInit& init, int frames);

/// z' = IFFT3D(FFT3D(z_T) * H + FFT3D(eta) * (1 - H)) per channel.
LatentVideo frequency_fuse(const LatentVideo& z_T, const LatentVideo& eta, const FrequencyFilter& filter);

/// Tolerance on the discarded imaginary residue of frequency_fuse, relative
/// to max(1, peak magnitude of the inputs).
inline constexpr float kImagResidueTolerance = 1e-5f;

}  // namespace glcd
