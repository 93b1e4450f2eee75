// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glcd/clip_maps.hpp"
#include "glcd/denoiser.hpp"
#include "glcd/errors.hpp"
#include "glcd/fusion.hpp"
#include "glcd/noise_reinit.hpp"
#include "glcd/schedule.hpp"
#include "glcd/vmcr.hpp"

namespace glcd {

/// Every knob of a run. Defaults for gamma0, beta_anneal, lambda_anchor and
/// the VMCR weights are the published hyperparameters; zero-valued
/// dilation / stride / shuffle_window mean "derive from K and L".
struct PipelineConfig {
    // Latent geometry.
    int frames = 24;
    int channels = 4;
    int height = 8;
    int width = 8;
    int clip_length = 8;
    int dilation = 0;        // 0: ceil(K / L)
    int stride = 0;          // 0: max(1, L / 2)
    int max_padded_frames = 1 << 16;

    // Sampling schedule.
    int steps = 50;
    int train_steps = 1000;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    std::uint64_t seed = 0;

    // Global-local collaborative denoising.
    bool enable_global = true;
    bool enable_local = true;
    double gamma0 = 0.005;
    double beta_anneal = 0.0005;
    std::optional<double> gamma_override;
    WeightKind weight_profile = WeightKind::Uniform;
    bool per_clip_shift = false;

    // Anchor-based attention.
    bool enable_abam = true;
    bool abam_on_global = false;  // local path only by default
    double lambda_anchor = 0.1;

    // Noise reinitialization.
    bool enable_shuffle = true;
    int shuffle_window = 0;  // 0: clip_length
    bool enable_freq_filter = true;
    FilterKind filter_kind = FilterKind::GaussianLP;
    double filter_cutoff = 0.25;

    // Motion consistency refinement.
    bool enable_vmcr = true;
    VmcrParams vmcr{};

    // Denoiser selection.
    std::string denoiser = "zero";
    double denoiser_mu = 0.5;
    double denoiser_sigma = 0.5;
    double noise_scale = 0.1;
    int attention_dim = 4;
    std::string conditioning;
    std::string bridge_endpoint;

    int threads = 1;

    int resolved_dilation() const;
    int resolved_stride() const;
    int resolved_shuffle_window() const;
    Shape latent_shape() const { return Shape{frames, channels, height, width}; }
    AnnealParams anneal() const { return AnnealParams{gamma0, beta_anneal}; }

    /// Throws ConfigError naming the offending key.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&);
};

struct StepReport {
    int step = 0;
    int t = 0;
    int t_next = 0;
    double gamma = 0.0;
    double residual_global = 0.0;
    double residual_local = 0.0;
    int global_clips = 0;
    int local_clips = 0;
    int shift = 0;
    std::optional<LossReport> vmcr;
    double wall_ms = 0.0;
};

struct RunResult {
    LatentVideo z0;
    LatentVideo z_init;
    std::vector<StepReport> reports;
    std::uint64_t seed = 0;
};

struct PipelineState {
    LatentVideo z;
    int step = 0;  // index of the next DDIM step
    std::optional<StepReport> last;
};

/// A module failure during a run, with the reports of completed steps.
class PipelineError : public Error {
public:
    PipelineError(const std::string& what, std::vector<StepReport> partial)
        : Error(what), partial_(std::move(partial)) {}
    const std::vector<StepReport>& partial_reports() const noexcept { return partial_; }

private:
    std::vector<StepReport> partial_;
};

/// Builds the default linear-beta schedule visiting cfg.steps timesteps.
DenoiseSchedule make_schedule(const PipelineConfig& cfg);

/// Instantiates the denoiser named by cfg.denoiser.
std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& cfg, const DenoiseSchedule& sched);

/// z'_T: shuffled noise unit fused with fresh noise through the low-pass
/// mask. With shuffling off the unit spans all K frames unpermuted; with the
/// filter off the fusion is skipped.
LatentVideo initial_latent(const PipelineConfig& cfg);

class Pipeline {
public:
    Pipeline(PipelineConfig cfg, Denoiser& denoiser);

    const PipelineConfig& config() const noexcept { return cfg_; }
    const DenoiseSchedule& schedule() const noexcept { return sched_; }

    PipelineState initial_state() const;
    /// One loop body: global and local clip denoising, fusion, refinement.
    PipelineState step(PipelineState state);
    RunResult run();

    /// Local maps used at DDIM step `step`.
    std::vector<ClipMap> local_maps(int step) const;
    std::vector<ClipMap> global_maps() const;
    double gamma_at(int t) const;

    /// Denoises every clip of one path from t to t_next, returning the
    /// stepped clips in map order.
    PathClips denoise_path(const LatentVideo& z, const std::vector<ClipMap>& maps, int t, int t_next);
    /// Full-length noise prediction at t assembled from clip predictions.
    LatentVideo tiled_prediction(const LatentVideo& z, const std::vector<ClipMap>& maps, int t);

private:
    std::vector<DenoisePrediction> predict_clips(const LatentVideo& z, const std::vector<ClipMap>& maps, int t,
                                                 bool use_anchor);

    PipelineConfig cfg_;
    Denoiser& denoiser_;
    DenoiseSchedule sched_;
    ShiftPlan shifts_;
    WeightProfile weights_;
};

/// Convenience: Pipeline(cfg, denoiser).run().
RunResult run(const PipelineConfig& cfg, Denoiser& denoiser);

/// Report of the most recent step held by the state.
std::optional<StepReport> diagnostics(const PipelineState& state);

/// One CSV row per step; header first. Timings are omitted unless requested
/// so repeated runs serialise identically.
std::string reports_csv(const std::vector<StepReport>& reports, bool include_timing = false);

}  // namespace glcd
