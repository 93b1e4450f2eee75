// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {

void AnchorKV::validate() const {
    if (tokens < 1 || key_dim < 1 || value_dim < 1) throw ShapeError("anchor K/V extents must be positive");
    if (keys.size() != static_cast<std::size_t>(tokens) * key_dim ||
        values.size() != static_cast<std::size_t>(tokens) * value_dim) {
        throw ShapeError("anchor K/V buffers do not match their extents");
    }
    if (!(lambda >= 0.0f && lambda <= 1.0f)) throw ParameterError("anchor lambda must lie in [0, 1]");
}

AnchorKV Denoiser::capture_kv(const DenoiseRequest&) {
    throw DenoiserError(fmt::format("denoiser '{}' does not expose attention", name()));
}

DenoisePrediction ZeroDenoiser::denoise(const DenoiseRequest& req) {
    return DenoisePrediction{LatentVideo(req.clip.shape(), 0.0f), req.t};
}

LinearGaussianDenoiser::LinearGaussianDenoiser(DenoiseSchedule sched, double mu, double sigma)
    : sched_(std::move(sched)), mu_(mu), sigma_(sigma) {
    if (!(sigma >= 0.0)) throw ParameterError("data sigma must be >= 0");
}

std::pair<double, double> LinearGaussianDenoiser::coefficients(int t) const {
    const double a = sched_.alpha_bar(t);
    const double slope = std::sqrt(1.0 - a) / (1.0 - a * (1.0 - sigma_ * sigma_));
    return {slope, -slope * std::sqrt(a) * mu_};
}

DenoisePrediction LinearGaussianDenoiser::denoise(const DenoiseRequest& req) {
    if (req.t < 1) throw DenoiserError(fmt::format("linear_gaussian: timestep {} has no noise (clip {})", req.t, req.clip_id));
    const auto [slope, intercept] = coefficients(req.t);
    const auto s = static_cast<float>(slope);
    const auto b = static_cast<float>(intercept);
    LatentVideo eps(req.clip.shape());
    auto dst = eps.data();
    auto src = req.clip.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = s * src[i] + b;
    return DenoisePrediction{std::move(eps), req.t};
}

DenoisePrediction SeededNoisyDenoiser::denoise(const DenoiseRequest& req) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(req.t), static_cast<std::uint32_t>(req.clip_id),
                      static_cast<std::uint32_t>(req.path == PathKind::Global ? 1 : 2)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<float> normal(0.0f, static_cast<float>(scale_));
    LatentVideo eps(req.clip.shape());
    for (float& v : eps.data()) v = normal(rng);
    return DenoisePrediction{std::move(eps), req.t};
}

std::pair<std::vector<float>, std::vector<float>> blend_anchor_kv(const std::vector<float>& keys,
                                                                  const std::vector<float>& values,
                                                                  const AnchorKV& anchor) {
    anchor.validate();
    if (keys.size() != anchor.keys.size() || values.size() != anchor.values.size()) {
        throw ShapeError(fmt::format("anchor K/V ({}, {}) does not match clip K/V ({}, {})", anchor.keys.size(),
                                     anchor.values.size(), keys.size(), values.size()));
    }
    const float lam = anchor.lambda;
    const float rest = 1.0f - lam;
    std::pair<std::vector<float>, std::vector<float>> out{std::vector<float>(keys.size()),
                                                          std::vector<float>(values.size())};
    for (std::size_t i = 0; i < keys.size(); ++i) out.first[i] = lam * keys[i] + rest * anchor.keys[i];
    for (std::size_t i = 0; i < values.size(); ++i) out.second[i] = lam * values[i] + rest * anchor.values[i];
    return out;
}

void ToyAttentionParams::validate() const {
    if (channels < 1 || key_dim < 1) throw ParameterError("toy attention needs positive channel and key dims");
    const auto cd = static_cast<std::size_t>(channels) * key_dim;
    if (wq.size() != cd || wk.size() != cd || wv.size() != static_cast<std::size_t>(channels) * channels) {
        throw ShapeError("toy attention weight matrices have the wrong size");
    }
}

ToyAttentionParams ToyAttentionParams::random(int channels, int key_dim, std::uint64_t seed, float scale) {
    ToyAttentionParams p;
    p.channels = channels;
    p.key_dim = key_dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, scale / std::sqrt(static_cast<float>(channels)));
    auto fill = [&](std::vector<float>& w, std::size_t n) {
        w.resize(n);
        for (float& v : w) v = normal(rng);
    };
    fill(p.wq, static_cast<std::size_t>(channels) * key_dim);
    fill(p.wk, static_cast<std::size_t>(channels) * key_dim);
    fill(p.wv, static_cast<std::size_t>(channels) * channels);
    return p;
}

AttentionProjections toy_attention_project(const LatentVideo& clip, const ToyAttentionParams& params) {
    params.validate();
    if (clip.channels() != params.channels) {
        throw ShapeError(fmt::format("toy attention built for {} channels, clip has {}", params.channels, clip.channels()));
    }
    const int T = clip.frames(), C = clip.channels(), D = params.key_dim;
    const std::size_t plane = static_cast<std::size_t>(clip.height()) * clip.width();

    AttentionProjections proj;
    proj.tokens = T;
    proj.q.assign(static_cast<std::size_t>(T) * D, 0.0f);
    proj.k.assign(static_cast<std::size_t>(T) * D, 0.0f);
    proj.v.assign(static_cast<std::size_t>(T) * C, 0.0f);
    std::vector<float> e(static_cast<std::size_t>(C));
    for (int j = 0; j < T; ++j) {
        auto f = clip.frame(j);
        for (int c = 0; c < C; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < plane; ++i) s += f[static_cast<std::size_t>(c) * plane + i];
            e[static_cast<std::size_t>(c)] = static_cast<float>(s / static_cast<double>(plane));
        }
        for (int c = 0; c < C; ++c) {
            const float ec = e[static_cast<std::size_t>(c)];
            for (int d = 0; d < D; ++d) {
                proj.q[static_cast<std::size_t>(j * D + d)] += ec * params.wq[static_cast<std::size_t>(c * D + d)];
                proj.k[static_cast<std::size_t>(j * D + d)] += ec * params.wk[static_cast<std::size_t>(c * D + d)];
            }
            for (int o = 0; o < C; ++o) {
                proj.v[static_cast<std::size_t>(j * C + o)] += ec * params.wv[static_cast<std::size_t>(c * C + o)];
            }
        }
    }
    return proj;
}

std::vector<float> toy_attention_weights(const AttentionProjections& proj, const std::optional<AnchorKV>& anchor,
                                         int key_dim) {
    const int T = proj.tokens;
    std::vector<float> keys = proj.k;
    if (anchor) keys = blend_anchor_kv(proj.k, proj.v, *anchor).first;

    const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(key_dim));
    std::vector<float> w(static_cast<std::size_t>(T) * T);
    for (int i = 0; i < T; ++i) {
        float peak = -INFINITY;
        for (int j = 0; j < T; ++j) {
            float s = 0.0f;
            for (int d = 0; d < key_dim; ++d) {
                s += proj.q[static_cast<std::size_t>(i * key_dim + d)] * keys[static_cast<std::size_t>(j * key_dim + d)];
            }
            s *= inv_sqrt;
            w[static_cast<std::size_t>(i * T + j)] = s;
            peak = std::max(peak, s);
        }
        float total = 0.0f;
        for (int j = 0; j < T; ++j) {
            float& v = w[static_cast<std::size_t>(i * T + j)];
            v = std::exp(v - peak);
            total += v;
        }
        for (int j = 0; j < T; ++j) w[static_cast<std::size_t>(i * T + j)] /= total;
    }
    return w;
}

LatentVideo toy_attention_forward(const LatentVideo& clip, const ToyAttentionParams& params,
                                  const std::optional<AnchorKV>& anchor) {
    const AttentionProjections proj = toy_attention_project(clip, params);
    const int T = proj.tokens, C = clip.channels();
    std::vector<float> values = proj.v;
    if (anchor) values = blend_anchor_kv(proj.k, proj.v, *anchor).second;
    const std::vector<float> w = toy_attention_weights(proj, anchor, params.key_dim);

    LatentVideo out = clip;
    const std::size_t plane = static_cast<std::size_t>(clip.height()) * clip.width();
    for (int i = 0; i < T; ++i) {
        auto f = out.frame(i);
        for (int c = 0; c < C; ++c) {
            float att = 0.0f;
            for (int j = 0; j < T; ++j) {
                att += w[static_cast<std::size_t>(i * T + j)] * values[static_cast<std::size_t>(j * C + c)];
            }
            for (std::size_t p = 0; p < plane; ++p) f[static_cast<std::size_t>(c) * plane + p] += att;
        }
    }
    return out;
}

ToyAttentionDenoiser::ToyAttentionDenoiser(ToyAttentionParams params, DenoiseSchedule sched, double mu, double sigma,
                                           float lambda)
    : params_(std::move(params)), posterior_(std::move(sched), mu, sigma), lambda_(lambda) {
    params_.validate();
    if (!(lambda >= 0.0f && lambda <= 1.0f)) throw ParameterError("anchor lambda must lie in [0, 1]");
}

DenoisePrediction ToyAttentionDenoiser::denoise(const DenoiseRequest& req) {
    DenoiseRequest inner;
    inner.clip = toy_attention_forward(req.clip, params_, req.anchor);
    inner.t = req.t;
    inner.clip_id = req.clip_id;
    inner.path = req.path;
    return posterior_.denoise(inner);
}

AnchorKV ToyAttentionDenoiser::capture_kv(const DenoiseRequest& req) {
    const AttentionProjections proj = toy_attention_project(req.clip, params_);
    AnchorKV kv;
    kv.keys = proj.k;
    kv.values = proj.v;
    kv.tokens = proj.tokens;
    kv.key_dim = params_.key_dim;
    kv.value_dim = params_.channels;
    kv.lambda = lambda_;
    return kv;
}

void AnchorStore::begin_timestep(int t) {
    t_ = t;
    anchor_.reset();
}

void AnchorStore::capture(AnchorKV kv) {
    kv.validate();
    anchor_ = std::move(kv);
}

const AnchorKV& AnchorStore::get() const {
    if (!anchor_) throw OrderingError(fmt::format("anchor K/V requested before capture at timestep {}", t_));
    return *anchor_;
}

}  // namespace glcd
