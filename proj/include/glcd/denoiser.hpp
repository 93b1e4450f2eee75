// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glcd/clip_maps.hpp"
#include "glcd/latent.hpp"
#include "glcd/schedule.hpp"

namespace glcd {

/// Attention keys and values captured from an anchor clip, one row of `dim`
/// values per frame token.
struct AnchorKV {
    std::vector<float> keys;
    std::vector<float> values;
    int tokens = 0;
    int key_dim = 0;
    int value_dim = 0;
    float lambda = 0.1f;

    void validate() const;
};

struct DenoiseRequest {
    LatentVideo clip;
    int t = 0;
    std::string conditioning;
    int clip_id = 0;
    PathKind path = PathKind::Local;
    std::optional<AnchorKV> anchor;
};

struct DenoiserCapabilities {
    bool concurrent_safe = false;
    bool deterministic = false;
    bool exposes_attention = false;
};

/// Noise predictor Phi(z_t, t, y) driven by the sampling pipeline.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual std::string name() const = 0;
    virtual DenoiserCapabilities capabilities() const = 0;
    virtual DenoisePrediction denoise(const DenoiseRequest& req) = 0;

    /// Keys/values of the request's clip, for denoisers that expose attention.
    virtual AnchorKV capture_kv(const DenoiseRequest& req);
};

/// Predicts eps = 0 everywhere.
class ZeroDenoiser final : public Denoiser {
public:
    std::string name() const override { return "zero"; }
    DenoiserCapabilities capabilities() const override { return {true, true, false}; }
    DenoisePrediction denoise(const DenoiseRequest& req) override;
};

/// Exact posterior-mean noise prediction for data x0 ~ N(mu, sigma^2 I):
/// eps(z, t) = sqrt(1 - a) (z - sqrt(a) mu) / (1 - a (1 - sigma^2)).
class LinearGaussianDenoiser final : public Denoiser {
public:
    LinearGaussianDenoiser(DenoiseSchedule sched, double mu, double sigma);

    std::string name() const override { return "linear_gaussian"; }
    DenoiserCapabilities capabilities() const override { return {true, true, false}; }
    DenoisePrediction denoise(const DenoiseRequest& req) override;

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    /// (slope, intercept) of the elementwise map z -> eps at timestep t.
    std::pair<double, double> coefficients(int t) const;

private:
    DenoiseSchedule sched_;
    double mu_;
    double sigma_;
};

/// Zero prediction plus Gaussian noise seeded by (seed, t, path, clip_id).
class SeededNoisyDenoiser final : public Denoiser {
public:
    SeededNoisyDenoiser(std::uint64_t seed, double scale) : seed_(seed), scale_(scale) {}

    std::string name() const override { return "seeded_noisy"; }
    DenoiserCapabilities capabilities() const override { return {true, true, false}; }
    DenoisePrediction denoise(const DenoiseRequest& req) override;

private:
    std::uint64_t seed_;
    double scale_;
};

/// K = lambda * K_orig + (1 - lambda) * K_anchor, likewise for V.
std::pair<std::vector<float>, std::vector<float>> blend_anchor_kv(const std::vector<float>& keys,
                                                                  const std::vector<float>& values,
                                                                  const AnchorKV& anchor);

/// Single-head attention over frames. Each frame is embedded as its
/// per-channel spatial mean e (length C); q = e Wq, k = e Wk (dim d),
/// v = e Wv (dim C). The attended value of frame j is added to every pixel of
/// channel c in frame j.
struct ToyAttentionParams {
    int channels = 0;
    int key_dim = 0;
    std::vector<float> wq;  // C x d, row-major
    std::vector<float> wk;  // C x d
    std::vector<float> wv;  // C x C

    void validate() const;
    /// Deterministic small random weights.
    static ToyAttentionParams random(int channels, int key_dim, std::uint64_t seed, float scale = 0.5f);
};

struct AttentionProjections {
    int tokens = 0;
    std::vector<float> q, k, v;  // tokens x d, tokens x d, tokens x C
};

AttentionProjections toy_attention_project(const LatentVideo& clip, const ToyAttentionParams& params);

/// Softmax(q k^T / sqrt(d)) rows, tokens x tokens, after optional anchor blending.
std::vector<float> toy_attention_weights(const AttentionProjections& proj, const std::optional<AnchorKV>& anchor,
                                         int key_dim);

LatentVideo toy_attention_forward(const LatentVideo& clip, const ToyAttentionParams& params,
                                  const std::optional<AnchorKV>& anchor);

/// Toy attention block followed by the Gaussian posterior noise prediction
/// on its output. Exposes K/V so the anchor mechanism runs end to end.
class ToyAttentionDenoiser final : public Denoiser {
public:
    ToyAttentionDenoiser(ToyAttentionParams params, DenoiseSchedule sched, double mu, double sigma, float lambda);

    std::string name() const override { return "toy_attention"; }
    DenoiserCapabilities capabilities() const override { return {true, true, true}; }
    DenoisePrediction denoise(const DenoiseRequest& req) override;
    AnchorKV capture_kv(const DenoiseRequest& req) override;

    const ToyAttentionParams& params() const noexcept { return params_; }

private:
    ToyAttentionParams params_;
    LinearGaussianDenoiser posterior_;
    float lambda_;
};

/// Anchor K/V lifecycle for one denoising path: captured once per timestep
/// from the path's first clip, consumed by every later clip of that step.
class AnchorStore {
public:
    /// Starts timestep t, discarding the previous anchor.
    void begin_timestep(int t);
    void capture(AnchorKV kv);
    bool has_anchor() const noexcept { return anchor_.has_value(); }
    const AnchorKV& get() const;
    int timestep() const noexcept { return t_; }

private:
    int t_ = -1;
    std::optional<AnchorKV> anchor_;
};

}  // namespace glcd
