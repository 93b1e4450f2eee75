// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {

double annealing_gamma(int t, const AnnealParams& p) {
    if (!(p.gamma0 > 0.0 && p.gamma0 <= 1.0)) throw ParameterError("gamma0 must lie in (0, 1]");
    if (!(p.beta >= 0.0)) throw ParameterError("annealing beta must be >= 0");
    if (t < 0) throw ParameterError("annealing timestep must be >= 0");
    return std::min(p.gamma0 * std::exp(p.beta * t), 1.0);
}

namespace {

void check_path(const PathClips& path, const char* context) {
    if (path.clips.size() != path.maps.size() || path.clips.size() != path.weights.size()) {
        throw ShapeError(fmt::format("{}: clips, maps and weights differ in length", context));
    }
}

Shape frame_shape_of(const PathClips& a, const PathClips& b) {
    if (!a.clips.empty()) return a.clips.front().shape();
    if (!b.clips.empty()) return b.clips.front().shape();
    throw ShapeError("fusion needs at least one clip");
}

}  // namespace

LatentVideo fuse_path(const PathClips& path, int frames) {
    check_path(path, "fuse_path");
    if (path.clips.empty()) throw ShapeError("fuse_path needs at least one clip");

    LatentVideo num(path.clips.front().shape().with_frames(frames));
    std::vector<float> den(static_cast<std::size_t>(frames), 0.0f);
    for (std::size_t i = 0; i < path.size(); ++i) {
        scatter_accumulate(num, den, path.clips[i], path.maps[i], path.weights[i]);
    }
    for (int f = 0; f < frames; ++f) {
        const float d = den[static_cast<std::size_t>(f)];
        if (!(d > 0.0f)) throw CoverageError(fmt::format("frame {} received zero total weight", f), f);
        for (float& v : num.frame(f)) v /= d;
    }
    return num;
}

FusedStep glcd_fuse(const LatentVideo& global, const LatentVideo& local, double gamma) {
    require_same_shape(global, local, "glcd_fuse");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError(fmt::format("gamma {} outside [0, 1]", gamma));

    const auto g = static_cast<float>(gamma);
    const float l = 1.0f - g;
    LatentVideo out(global.shape());
    auto dst = out.data();
    auto a = global.data();
    auto b = local.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const float lo = std::min(a[i], b[i]);
        const float hi = std::max(a[i], b[i]);
        dst[i] = std::clamp(g * a[i] + l * b[i], lo, hi);
    }
    return FusedStep{std::move(out), gamma, 0.0, 0.0};
}

LatentVideo brute_force_fuse(const PathClips& global, const PathClips& local, double gamma, int frames) {
    check_path(global, "brute_force_fuse(global)");
    check_path(local, "brute_force_fuse(local)");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError(fmt::format("gamma {} outside [0, 1]", gamma));

    // Normal equations of a diagonal system: accumulate in double.
    const Shape shape = frame_shape_of(global, local).with_frames(frames);
    const std::size_t fs = shape.frame_size();
    std::vector<double> num(shape.size(), 0.0);
    std::vector<double> den(static_cast<std::size_t>(frames), 0.0);

    auto accumulate = [&](const PathClips& path, double scale) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            const ClipMap& map = path.maps[i];
            if (map.real_frames != frames || path.clips[i].frames() != map.length() ||
                path.clips[i].shape().frame_size() != fs) {
                throw ShapeError("brute_force_fuse: clip does not match its map");
            }
            for (int j = 0; j < map.length(); ++j) {
                const double w = scale * path.weights[i][static_cast<std::size_t>(j)];
                const int f = map.source_frame(j);
                auto src = path.clips[i].frame(j);
                for (std::size_t e = 0; e < fs; ++e) num[static_cast<std::size_t>(f) * fs + e] += w * src[e];
                den[static_cast<std::size_t>(f)] += w;
            }
        }
    };
    accumulate(global, gamma);
    accumulate(local, 1.0 - gamma);

    LatentVideo out(shape);
    for (int f = 0; f < frames; ++f) {
        const double d = den[static_cast<std::size_t>(f)];
        if (!(d > 0.0)) throw CoverageError(fmt::format("frame {} has zero combined weight", f), f);
        auto dst = out.frame(f);
        for (std::size_t e = 0; e < fs; ++e) dst[e] = static_cast<float>(num[static_cast<std::size_t>(f) * fs + e] / d);
    }
    return out;
}

double path_residual(const LatentVideo& fused, const PathClips& path) {
    check_path(path, "path_residual");
    double acc = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const LatentVideo seen = gather(fused, path.maps[i]);
        require_same_shape(seen, path.clips[i], "path_residual");
        for (int j = 0; j < seen.frames(); ++j) {
            auto a = seen.frame(j);
            auto b = path.clips[i].frame(j);
            for (std::size_t e = 0; e < a.size(); ++e) {
                const double d = static_cast<double>(a[e]) - b[e];
                acc += d * d;
            }
        }
    }
    return std::sqrt(acc);
}

}  // namespace glcd
