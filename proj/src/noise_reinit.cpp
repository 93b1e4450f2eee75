// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/noise_reinit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "glcd/errors.hpp"
#include "glcd/fft.hpp"

namespace glcd {

namespace {

// Sub-seed derivation: distinct streams for eps, eta and the shuffle.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x6e6f6973u};
    std::mt19937_64 rng(seq);
    return rng();
}

constexpr std::uint64_t kEpsStream = 1;
constexpr std::uint64_t kEtaStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

}  // namespace

std::string_view to_string(FilterKind kind) {
    switch (kind) {
    case FilterKind::GaussianLP: return "gaussian";
    case FilterKind::IdealBoxLP: return "box";
    case FilterKind::AllPass: return "allpass";
    case FilterKind::AllStop: return "allstop";
    }
    return "?";
}

FilterKind parse_filter_kind(std::string_view name) {
    if (name == "gaussian") return FilterKind::GaussianLP;
    if (name == "box") return FilterKind::IdealBoxLP;
    if (name == "allpass") return FilterKind::AllPass;
    if (name == "allstop") return FilterKind::AllStop;
    throw ParameterError(fmt::format("unknown filter kind '{}' (gaussian|box|allpass|allstop)", name));
}

FrequencyFilter::FrequencyFilter(int frames, int height, int width, std::vector<float> mask, FilterKind kind,
                                 double cutoff)
    : frames_(frames), height_(height), width_(width), mask_(std::move(mask)), kind_(kind), cutoff_(cutoff) {
    if (frames < 1 || height < 1 || width < 1) throw ShapeError("filter extents must be positive");
    if (mask_.size() != static_cast<std::size_t>(frames) * height * width) {
        throw ShapeError("filter mask does not match its extents");
    }
    for (float v : mask_) {
        if (!(v >= 0.0f && v <= 1.0f)) throw ParameterError("filter mask values must lie in [0, 1]");
    }
}

bool FrequencyFilter::conjugate_symmetric() const noexcept {
    for (int k = 0; k < frames_; ++k)
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) {
                const int kk = (frames_ - k) % frames_;
                const int yy = (height_ - y) % height_;
                const int xx = (width_ - x) % width_;
                if (at(k, y, x) != at(kk, yy, xx)) return false;
            }
    return true;
}

double normalized_frequency(int bin, int n) {
    return static_cast<double>(std::min(bin, n - bin)) / n;
}

FrequencyFilter make_lpf(int frames, int height, int width, FilterKind kind, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 0.5)) throw ParameterError(fmt::format("cutoff {} outside (0, 0.5]", cutoff));
    std::vector<float> mask(static_cast<std::size_t>(frames) * height * width);
    std::size_t i = 0;
    for (int k = 0; k < frames; ++k) {
        const double fk = normalized_frequency(k, frames);
        for (int y = 0; y < height; ++y) {
            const double fy = normalized_frequency(y, height);
            for (int x = 0; x < width; ++x, ++i) {
                const double fx = normalized_frequency(x, width);
                switch (kind) {
                case FilterKind::GaussianLP:
                    mask[i] = static_cast<float>(std::exp(-(fk * fk + fy * fy + fx * fx) / (2.0 * cutoff * cutoff)));
                    break;
                case FilterKind::IdealBoxLP:
                    mask[i] = std::max({fk, fy, fx}) <= cutoff ? 1.0f : 0.0f;
                    break;
                case FilterKind::AllPass: mask[i] = 1.0f; break;
                case FilterKind::AllStop: mask[i] = 0.0f; break;
                }
            }
        }
    }
    return FrequencyFilter(frames, height, width, std::move(mask), kind, cutoff);
}

LatentVideo gaussian_latent(Shape shape, std::uint64_t seed) {
    LatentVideo z(shape);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (float& v : z.data()) v = normal(rng);
    return z;
}

NoiseInit make_noise_init(std::uint64_t seed, Shape full, int shuffle_window) {
    if (shuffle_window < 1) throw ParameterError("shuffle window must be >= 1");
    NoiseInit init;
    init.seed = seed;
    init.shuffle_window = shuffle_window;
    init.eps_unit = gaussian_latent(full.with_frames(shuffle_window), sub_seed(seed, kEpsStream));
    init.eta = gaussian_latent(full, sub_seed(seed, kEtaStream));
    return init;
}

LatentVideo local_noise_shuffle(const NoiseInit& init, int frames) {
    const int window = init.shuffle_window;
    if (window < 1 || init.eps_unit.frames() != window) {
        throw ShapeError(fmt::format("noise unit has {} frames, shuffle window is {}", init.eps_unit.frames(), window));
    }
    if (frames < 1) throw ShapeError("shuffled noise needs at least one frame");

    LatentVideo out(init.eps_unit.shape().with_frames(frames));
    std::mt19937_64 rng(sub_seed(init.seed, kShuffleStream));
    std::vector<int> order;
    for (int start = 0; start < frames; start += window) {
        const int n = std::min(window, frames - start);
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int j = 0; j < n; ++j) {
            auto src = init.eps_unit.frame(order[static_cast<std::size_t>(j)]);
            std::copy(src.begin(), src.end(), out.frame(start + j).begin());
        }
    }
    return out;
}

LatentVideo frequency_fuse(const LatentVideo& z_T, const LatentVideo& eta, const FrequencyFilter& filter) {
    require_same_shape(z_T, eta, "frequency_fuse");
    const int K = z_T.frames(), C = z_T.channels(), H = z_T.height(), W = z_T.width();
    if (filter.frames() != K || filter.height() != H || filter.width() != W) {
        throw ShapeError(fmt::format("filter grid ({}, {}, {}) does not match latent {}", filter.frames(),
                                     filter.height(), filter.width(), z_T.shape().str()));
    }

    const std::size_t plane = static_cast<std::size_t>(H) * W;
    const std::size_t vol = plane * K;
    std::vector<float> a(vol), b(vol);
    LatentVideo out(z_T.shape());
    const float tol = kImagResidueTolerance * std::max({1.0f, z_T.max_abs(), eta.max_abs()});
    const auto& mask = filter.mask();

    for (int c = 0; c < C; ++c) {
        for (int k = 0; k < K; ++k) {
            auto za = z_T.frame(k).subspan(static_cast<std::size_t>(c) * plane, plane);
            auto zb = eta.frame(k).subspan(static_cast<std::size_t>(c) * plane, plane);
            std::copy(za.begin(), za.end(), a.begin() + static_cast<std::ptrdiff_t>(k * plane));
            std::copy(zb.begin(), zb.end(), b.begin() + static_cast<std::ptrdiff_t>(k * plane));
        }
        auto fa = fft::forward3d(a, K, H, W);
        const auto fb = fft::forward3d(b, K, H, W);
        for (std::size_t i = 0; i < vol; ++i) fa[i] = fa[i] * mask[i] + fb[i] * (1.0f - mask[i]);

        float max_imag = 0.0f;
        const auto fused = fft::inverse3d_real(std::move(fa), K, H, W, max_imag);
        if (max_imag > tol) {
            throw FilterSymmetryError(
                fmt::format("imaginary residue {} exceeds {} in channel {}; filter is not conjugate symmetric",
                            max_imag, tol, c));
        }
        for (int k = 0; k < K; ++k) {
            auto dst = out.frame(k).subspan(static_cast<std::size_t>(c) * plane, plane);
            std::copy_n(fused.begin() + static_cast<std::ptrdiff_t>(k * plane), plane, dst.begin());
        }
    }
    return out;
}

}  // namespace glcd
