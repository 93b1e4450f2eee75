// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "glcd/clip_maps.hpp"
#include "glcd/latent.hpp"

namespace glcd {

/// gamma = min(gamma0 * exp(beta * t), 1).
struct AnnealParams {
    double gamma0 = 0.005;
    double beta = 0.0005;
};

double annealing_gamma(int t, const AnnealParams& p);

/// Clips produced by one denoising path together with their maps and weights.
struct PathClips {
    std::vector<LatentVideo> clips;
    std::vector<ClipMap> maps;
    std::vector<WeightProfile> weights;

    std::size_t size() const noexcept { return clips.size(); }
};

struct FusedStep {
    LatentVideo latent;
    double gamma_used = 0.0;
    double residual_global = 0.0;
    double residual_local = 0.0;
};

/// Weighted per-frame mean of the clips scattered back through their maps:
/// sum_i W_i (x) F_i^-1(clip_i) / sum_i W_i. Throws CoverageError naming
/// the first frame that receives zero total weight.
LatentVideo fuse_path(const PathClips& path, int frames);

/// Elementwise gamma * global + (1 - gamma) * local. The result is clamped
/// into [min, max] of the two inputs so the combination stays convex under
/// float rounding; equal inputs pass through bit-exact.
FusedStep glcd_fuse(const LatentVideo& global, const LatentVideo& local, double gamma);

/// Joint weighted least-squares merge over both paths: per pixel the
/// minimiser of sum_k || W_k (x) (F_k(z) - z_k) ||^2 where the global clips
/// carry factor gamma and the local clips factor (1 - gamma) on their profile
/// weights. Profile values act as the squared residual weights, which makes a
/// single path reduce to fuse_path exactly.
LatentVideo brute_force_fuse(const PathClips& global, const PathClips& local, double gamma, int frames);

/// L2 norm of the disagreement between each clip and the fused latent seen
/// through the clip's map: sqrt(sum_i || F_i(fused) - clip_i ||^2).
double path_residual(const LatentVideo& fused, const PathClips& path);

}  // namespace glcd
