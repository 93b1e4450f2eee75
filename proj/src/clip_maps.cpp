// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/clip_maps.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {

std::string_view to_string(PathKind path) {
    return path == PathKind::Global ? "global" : "local";
}

int ClipMap::source_frame(int j) const {
    const int p = indices.at(static_cast<std::size_t>(j));
    if (p < 0 || p >= padded_frames()) {
        throw ShapeError(fmt::format("clip index {} outside padded range [0, {})", p, padded_frames()));
    }
    return std::clamp(p - pad.left, 0, real_frames - 1);
}

bool ClipMap::is_real(int j) const {
    const int p = indices.at(static_cast<std::size_t>(j));
    return p >= pad.left && p < pad.left + real_frames;
}

WeightProfile::WeightProfile(std::vector<float> values) : values_(std::move(values)) {
    bool positive = false;
    for (float v : values_) {
        if (!(v >= 0.0f)) throw ParameterError("clip weights must be non-negative");
        positive = positive || v > 0.0f;
    }
    if (!positive) throw ParameterError("clip weights need at least one positive value");
}

WeightProfile clip_weights(int length, WeightKind kind) {
    if (length < 1) throw ParameterError("clip length must be >= 1");
    std::vector<float> w(static_cast<std::size_t>(length), 1.0f);
    if (kind == WeightKind::Triangular) {
        for (int j = 0; j < length; ++j) {
            const int rank = std::min(j, length - 1 - j);
            w[static_cast<std::size_t>(j)] = static_cast<float>(2 * rank + 1) / static_cast<float>(length);
        }
    }
    return WeightProfile(std::move(w));
}

int ShiftPlan::shift(int t, int stride, int clip) const {
    if (stride < 1) throw ParameterError("shift stride must be >= 1");
    if (stride == 1) return 0;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(per_clip ? clip + 1 : 0)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> dist(0, stride - 1);
    return dist(rng);
}

std::vector<ClipMap> make_global_maps(int frames, int length, int dilation, int max_padded_frames) {
    if (frames < 1 || length < 1 || dilation < 1) {
        throw ParameterError(fmt::format("global maps need K, L, d >= 1 (got K={}, L={}, d={})", frames, length, dilation));
    }
    if (dilation > frames) {
        throw ConfigError(fmt::format("dilation {} exceeds frame count {}", dilation, frames));
    }
    if (static_cast<long long>(dilation) * length < frames) {
        throw ConfigError(fmt::format("d*L = {} cannot cover {} frames", static_cast<long long>(dilation) * length, frames));
    }
    const long long padded = static_cast<long long>(dilation) * length;
    if (padded > max_padded_frames) {
        throw ConfigError(fmt::format("padded length {} exceeds limit {}", padded, max_padded_frames));
    }
    const PadSpec pad{0, static_cast<int>(padded) - frames, PadMode::Replicate};

    std::vector<ClipMap> maps;
    maps.reserve(static_cast<std::size_t>(dilation));
    for (int i = 0; i < dilation; ++i) {
        ClipMap m;
        m.path = PathKind::Global;
        m.clip_id = i;
        m.real_frames = frames;
        m.pad = pad;
        m.indices.reserve(static_cast<std::size_t>(length));
        for (int j = 0; j < length; ++j) m.indices.push_back(i + dilation * j);
        maps.push_back(std::move(m));
    }
    return maps;
}

std::vector<ClipMap> make_local_maps(int frames, int length, int stride, int t, const ShiftPlan& plan) {
    if (length < 1 || length > frames) {
        throw ShapeError(fmt::format("local clip length {} must be in [1, {}]", length, frames));
    }
    if (stride < 1 || stride > length) {
        throw ParameterError(fmt::format("local stride {} must be in [1, {}]", stride, length));
    }
    const int last = frames - length;
    std::vector<int> starts{0, last};
    int clip = 0;
    for (int base = 0; base <= last; base += stride, ++clip) {
        starts.push_back(std::clamp(base + plan.shift(t, stride, clip), 0, last));
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    // Independent per-clip shifts can open gaps wider than L; close them.
    std::vector<int> filled;
    for (int s : starts) {
        while (!filled.empty() && s > filled.back() + length) filled.push_back(filled.back() + length);
        filled.push_back(s);
    }

    const int shared_shift = plan.per_clip ? 0 : plan.shift(t, stride);
    std::vector<ClipMap> maps;
    maps.reserve(filled.size());
    for (std::size_t i = 0; i < filled.size(); ++i) {
        ClipMap m;
        m.path = PathKind::Local;
        m.clip_id = static_cast<int>(i);
        m.real_frames = frames;
        m.shift = shared_shift;
        m.indices.resize(static_cast<std::size_t>(length));
        for (int j = 0; j < length; ++j) m.indices[static_cast<std::size_t>(j)] = filled[i] + j;
        maps.push_back(std::move(m));
    }
    return maps;
}

LatentVideo gather(const LatentVideo& z, const ClipMap& map) {
    if (map.real_frames != z.frames()) {
        throw ShapeError(fmt::format("map built for {} frames applied to latent with {}", map.real_frames, z.frames()));
    }
    LatentVideo clip(z.shape().with_frames(map.length()));
    for (int j = 0; j < map.length(); ++j) {
        auto src = z.frame(map.source_frame(j));
        std::copy(src.begin(), src.end(), clip.frame(j).begin());
    }
    return clip;
}

void scatter_accumulate(LatentVideo& num, std::span<float> den, const LatentVideo& clip, const ClipMap& map,
                        const WeightProfile& w) {
    if (map.real_frames != num.frames() || den.size() != static_cast<std::size_t>(num.frames())) {
        throw ShapeError("scatter_accumulate: accumulator extents do not match the map");
    }
    if (clip.frames() != map.length() || w.size() != static_cast<std::size_t>(map.length()) ||
        clip.shape().frame_size() != num.shape().frame_size() || clip.channels() != num.channels() ||
        clip.height() != num.height()) {
        throw ShapeError(fmt::format("scatter_accumulate: clip {} / weights {} inconsistent with map length {}",
                                     clip.shape().str(), w.size(), map.length()));
    }
    for (int j = 0; j < map.length(); ++j) {
        const float wj = w[static_cast<std::size_t>(j)];
        const int f = map.source_frame(j);
        auto dst = num.frame(f);
        auto src = clip.frame(j);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wj * src[i];
        den[static_cast<std::size_t>(f)] += wj;
    }
}

}  // namespace glcd
