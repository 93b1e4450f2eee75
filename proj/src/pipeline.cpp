// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "glcd/bridge.hpp"

namespace glcd {

int PipelineConfig::resolved_dilation() const {
    return dilation > 0 ? dilation : (frames + clip_length - 1) / clip_length;
}

int PipelineConfig::resolved_stride() const {
    return stride > 0 ? stride : std::max(1, clip_length / 2);
}

int PipelineConfig::resolved_shuffle_window() const {
    return shuffle_window > 0 ? shuffle_window : clip_length;
}

namespace {

void require(bool ok, std::string_view key, std::string_view rule) {
    if (!ok) throw ConfigError(fmt::format("invalid value for '{}': {}", key, rule));
}

}  // namespace

void PipelineConfig::validate() const {
    require(frames >= 1, "frames", "must be >= 1");
    require(channels >= 1, "channels", "must be >= 1");
    require(height >= 1, "height", "must be >= 1");
    require(width >= 1, "width", "must be >= 1");
    require(clip_length >= 1 && clip_length <= frames, "clip_length", "must lie in [1, frames]");
    require(dilation >= 0, "dilation", "must be >= 0 (0 derives it)");
    require(dilation == 0 || (dilation <= frames && static_cast<long long>(dilation) * clip_length >= frames),
            "dilation", "must satisfy dilation <= frames and dilation * clip_length >= frames");
    require(stride >= 0 && stride <= clip_length, "stride", "must lie in [0, clip_length]");
    require(max_padded_frames >= frames, "max_padded_frames", "must be >= frames");
    require(steps >= 1 && steps <= train_steps, "steps", "must lie in [1, train_steps]");
    require(train_steps >= 1, "train_steps", "must be >= 1");
    require(beta_start > 0.0 && beta_start <= beta_end, "beta_start", "must satisfy 0 < beta_start <= beta_end");
    require(beta_end < 1.0, "beta_end", "must be < 1");
    require(enable_global || enable_local, "enable_global", "at least one denoising path must be enabled");
    require(gamma0 > 0.0 && gamma0 <= 1.0, "gamma0", "must lie in (0, 1]");
    require(beta_anneal >= 0.0, "beta_anneal", "must be >= 0");
    require(!gamma_override || (*gamma_override >= 0.0 && *gamma_override <= 1.0), "gamma_override",
            "must lie in [0, 1]");
    require(lambda_anchor >= 0.0 && lambda_anchor <= 1.0, "lambda", "must lie in [0, 1]");
    require(shuffle_window >= 0, "shuffle_window", "must be >= 0 (0 uses clip_length)");
    require(filter_cutoff > 0.0 && filter_cutoff <= 0.5, "filter_cutoff", "must lie in (0, 0.5]");
    require(vmcr.lambda_f >= 0.0, "lambda_f", "must be >= 0");
    require(vmcr.lambda_mse >= 0.0, "lambda_mse", "must be >= 0");
    require(vmcr.lambda_phase >= 0.0, "lambda_phase", "must be >= 0");
    require(vmcr.omega_motion >= 0.0, "omega_motion", "must be >= 0");
    require(vmcr.n_iters >= 0, "vmcr_iters", "must be >= 0");
    require(vmcr.eps_guard > 0.0, "eps_guard", "must be > 0");
    require(denoiser_sigma >= 0.0, "denoiser_sigma", "must be >= 0");
    require(noise_scale >= 0.0, "noise_scale", "must be >= 0");
    require(attention_dim >= 1, "attention_dim", "must be >= 1");
    require(threads >= 1, "threads", "must be >= 1");
    require(denoiser == "zero" || denoiser == "linear_gaussian" || denoiser == "seeded_noisy" ||
                denoiser == "toy_attention" || denoiser == "bridge",
            "denoiser", "must be one of zero|linear_gaussian|seeded_noisy|toy_attention|bridge");
    require(denoiser != "bridge" || !bridge_endpoint.empty(), "bridge_endpoint", "required for the bridge denoiser");
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    auto tie = [](const PipelineConfig& c) {
        return std::tie(c.frames, c.channels, c.height, c.width, c.clip_length, c.dilation, c.stride,
                        c.max_padded_frames, c.steps, c.train_steps, c.beta_start, c.beta_end, c.seed,
                        c.enable_global, c.enable_local, c.gamma0, c.beta_anneal, c.gamma_override, c.weight_profile,
                        c.per_clip_shift, c.enable_abam, c.abam_on_global, c.lambda_anchor, c.enable_shuffle,
                        c.shuffle_window, c.enable_freq_filter, c.filter_kind, c.filter_cutoff, c.enable_vmcr,
                        c.vmcr.lambda_f, c.vmcr.lambda_mse, c.vmcr.lambda_phase, c.vmcr.omega_motion, c.vmcr.n_iters,
                        c.vmcr.eps_guard, c.vmcr.wrap_phase, c.denoiser, c.denoiser_mu, c.denoiser_sigma,
                        c.noise_scale, c.attention_dim, c.conditioning, c.bridge_endpoint, c.threads);
    };
    return tie(a) == tie(b);
}

DenoiseSchedule make_schedule(const PipelineConfig& cfg) {
    return alpha_schedule(cfg.train_steps, cfg.beta_start, cfg.beta_end).strided(cfg.steps);
}

std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& cfg, const DenoiseSchedule& sched) {
    if (cfg.denoiser == "zero") return std::make_unique<ZeroDenoiser>();
    if (cfg.denoiser == "linear_gaussian") {
        return std::make_unique<LinearGaussianDenoiser>(sched, cfg.denoiser_mu, cfg.denoiser_sigma);
    }
    if (cfg.denoiser == "seeded_noisy") return std::make_unique<SeededNoisyDenoiser>(cfg.seed, cfg.noise_scale);
    if (cfg.denoiser == "toy_attention") {
        return std::make_unique<ToyAttentionDenoiser>(
            ToyAttentionParams::random(cfg.channels, cfg.attention_dim, cfg.seed ^ 0x746f79ull), sched,
            cfg.denoiser_mu, cfg.denoiser_sigma, static_cast<float>(cfg.lambda_anchor));
    }
    if (cfg.denoiser == "bridge") return std::make_unique<bridge::BridgeDenoiser>(cfg.bridge_endpoint);
    throw ConfigError(fmt::format("unknown denoiser '{}'", cfg.denoiser));
}

LatentVideo initial_latent(const PipelineConfig& cfg) {
    const Shape shape = cfg.latent_shape();
    const int window = cfg.enable_shuffle ? cfg.resolved_shuffle_window() : cfg.frames;
    const NoiseInit init = make_noise_init(cfg.seed, shape, window);
    LatentVideo z_T = cfg.enable_shuffle ? local_noise_shuffle(init, cfg.frames) : init.eps_unit;
    if (!cfg.enable_freq_filter) return z_T;
    const FrequencyFilter filter = make_lpf(cfg.frames, cfg.height, cfg.width, cfg.filter_kind, cfg.filter_cutoff);
    return frequency_fuse(z_T, init.eta, filter);
}

Pipeline::Pipeline(PipelineConfig cfg, Denoiser& denoiser)
    : cfg_(std::move(cfg)),
      denoiser_(denoiser),
      sched_((cfg_.validate(), make_schedule(cfg_))),
      shifts_{cfg_.seed, cfg_.per_clip_shift},
      weights_(clip_weights(cfg_.clip_length, cfg_.weight_profile)) {}

std::vector<ClipMap> Pipeline::global_maps() const {
    return make_global_maps(cfg_.frames, cfg_.clip_length, cfg_.resolved_dilation(), cfg_.max_padded_frames);
}

std::vector<ClipMap> Pipeline::local_maps(int step) const {
    return make_local_maps(cfg_.frames, cfg_.clip_length, cfg_.resolved_stride(), sched_.timesteps().at(step), shifts_);
}

double Pipeline::gamma_at(int t) const {
    if (!cfg_.enable_global) return 0.0;
    if (!cfg_.enable_local) return 1.0;
    if (cfg_.gamma_override) return *cfg_.gamma_override;
    return annealing_gamma(t, cfg_.anneal());
}

std::vector<DenoisePrediction> Pipeline::predict_clips(const LatentVideo& z, const std::vector<ClipMap>& maps, int t,
                                                       bool use_anchor) {
    const DenoiserCapabilities caps = denoiser_.capabilities();
    use_anchor = use_anchor && caps.exposes_attention && maps.size() > 1;

    std::vector<DenoiseRequest> requests(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) {
        requests[i].clip = gather(z, maps[i]);
        requests[i].t = t;
        requests[i].conditioning = cfg_.conditioning;
        requests[i].clip_id = maps[i].clip_id;
        requests[i].path = maps[i].path;
    }

    std::vector<DenoisePrediction> preds(maps.size());
    auto run_one = [&](std::size_t i) {
        try {
            preds[i] = denoiser_.denoise(requests[i]);
        } catch (const Error& e) {
            throw DenoiserError(fmt::format("{} clip {} at t={}: {}", to_string(maps[i].path), maps[i].clip_id, t,
                                            e.what()));
        }
        if (preds[i].eps.shape() != requests[i].clip.shape()) {
            throw DenoiserError(fmt::format("{} clip {} at t={}: prediction shape {} != clip shape {}",
                                            to_string(maps[i].path), maps[i].clip_id, t, preds[i].eps.shape().str(),
                                            requests[i].clip.shape().str()));
        }
    };

    std::size_t first = 0;
    if (use_anchor) {
        // Anchor capture completes before any consumer starts.
        AnchorStore store;
        store.begin_timestep(t);
        run_one(0);
        store.capture(denoiser_.capture_kv(requests[0]));
        for (std::size_t i = 1; i < requests.size(); ++i) requests[i].anchor = store.get();
        first = 1;
    }

    const int threads = caps.concurrent_safe ? cfg_.threads : 1;
    if (threads <= 1 || requests.size() - first < 2) {
        for (std::size_t i = first; i < requests.size(); ++i) run_one(i);
        return preds;
    }
    std::atomic<std::size_t> next{first};
    std::vector<std::exception_ptr> errors(requests.size());
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < requests.size(); i = next++) {
                try {
                    run_one(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return preds;
}

PathClips Pipeline::denoise_path(const LatentVideo& z, const std::vector<ClipMap>& maps, int t, int t_next) {
    const bool anchor = cfg_.enable_abam && (maps.empty() || maps.front().path == PathKind::Local || cfg_.abam_on_global);
    const auto preds = predict_clips(z, maps, t, anchor);
    PathClips out;
    out.maps = maps;
    out.clips.reserve(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) {
        out.clips.push_back(ddim_step(gather(z, maps[i]), preds[i], t, t_next, sched_));
        out.weights.push_back(weights_);
    }
    return out;
}

LatentVideo Pipeline::tiled_prediction(const LatentVideo& z, const std::vector<ClipMap>& maps, int t) {
    const auto preds = predict_clips(z, maps, t, false);
    PathClips tiles;
    tiles.maps = maps;
    for (const auto& p : preds) {
        tiles.clips.push_back(p.eps);
        tiles.weights.push_back(weights_);
    }
    return fuse_path(tiles, z.frames());
}

PipelineState Pipeline::initial_state() const {
    return PipelineState{initial_latent(cfg_), 0, std::nullopt};
}

PipelineState Pipeline::step(PipelineState state) {
    if (state.step >= sched_.num_steps()) throw ScheduleError("pipeline already reached t = 0");
    const auto start = std::chrono::steady_clock::now();
    const int t = sched_.timesteps()[static_cast<std::size_t>(state.step)];
    const int t_next = sched_.target(state.step);
    const LatentVideo& z = state.z;

    StepReport report;
    report.step = state.step;
    report.t = t;
    report.t_next = t_next;
    report.gamma = gamma_at(t);

    const auto local = make_local_maps(cfg_.frames, cfg_.clip_length, cfg_.resolved_stride(), t, shifts_);
    report.shift = local.front().shift;

    std::optional<LatentVideo> fused_global, fused_local;
    if (cfg_.enable_global) {
        const PathClips clips = denoise_path(z, global_maps(), t, t_next);
        fused_global = fuse_path(clips, cfg_.frames);
        report.residual_global = path_residual(*fused_global, clips);
        report.global_clips = static_cast<int>(clips.size());
    }
    if (cfg_.enable_local) {
        const PathClips clips = denoise_path(z, local, t, t_next);
        fused_local = fuse_path(clips, cfg_.frames);
        report.residual_local = path_residual(*fused_local, clips);
        report.local_clips = static_cast<int>(clips.size());
    }

    float input_max = 0.0f;
    if (fused_global) input_max = std::max(input_max, fused_global->max_abs());
    if (fused_local) input_max = std::max(input_max, fused_local->max_abs());

    LatentVideo next;
    if (fused_global && fused_local) {
        next = glcd_fuse(*fused_global, *fused_local, report.gamma).latent;
    } else {
        next = fused_global ? std::move(*fused_global) : std::move(*fused_local);
    }

    if (cfg_.enable_vmcr && cfg_.frames >= 3) {
        DenoisePrediction pred{LatentVideo(next.shape(), 0.0f), t_next};
        if (t_next > 0) pred.eps = tiled_prediction(next, local, t_next);
        auto [refined, loss] = vmcr_refine(next, pred, t_next, sched_, cfg_.vmcr);
        next = std::move(refined);
        report.vmcr = loss;
    }
    require_finite(next, "pipeline step");
    if (next.max_abs() > 10.0f * input_max) {
        throw NumericError(fmt::format("step output magnitude {} exceeds 10x the stepped clips' {}", next.max_abs(),
                                       input_max));
    }

    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return PipelineState{std::move(next), state.step + 1, report};
}

RunResult Pipeline::run() {
    RunResult result;
    result.seed = cfg_.seed;
    PipelineState state;
    try {
        state = initial_state();
    } catch (const Error& e) {
        throw PipelineError(fmt::format("noise initialisation: {}", e.what()), {});
    }
    result.z_init = state.z;
    while (state.step < sched_.num_steps()) {
        const int t = sched_.timesteps()[static_cast<std::size_t>(state.step)];
        try {
            state = step(std::move(state));
        } catch (const Error& e) {
            throw PipelineError(fmt::format("step {} (t={}): {}", state.step, t, e.what()), result.reports);
        }
        result.reports.push_back(*state.last);
    }
    result.z0 = std::move(state.z);
    return result;
}

RunResult run(const PipelineConfig& cfg, Denoiser& denoiser) {
    return Pipeline(cfg, denoiser).run();
}

std::optional<StepReport> diagnostics(const PipelineState& state) {
    return state.last;
}

std::string reports_csv(const std::vector<StepReport>& reports, bool include_timing) {
    std::string out =
        "step,t,t_next,gamma,residual_global,residual_local,global_clips,local_clips,shift,"
        "loss_total,loss_pixel,loss_freq,loss_amplitude,loss_phase,grad_norm";
    if (include_timing) out += ",wall_ms";
    out += '\n';
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{},{},{}", r.step, r.t, r.t_next, r.gamma, r.residual_global,
                           r.residual_local, r.global_clips, r.local_clips, r.shift);
        if (r.vmcr) {
            out += fmt::format(",{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}", r.vmcr->total, r.vmcr->pixel,
                               r.vmcr->freq, r.vmcr->amplitude, r.vmcr->phase, r.vmcr->grad_norm);
        } else {
            out += ",,,,,,";
        }
        if (include_timing) out += fmt::format(",{:.3f}", r.wall_ms);
        out += '\n';
    }
    return out;
}

}  // namespace glcd
