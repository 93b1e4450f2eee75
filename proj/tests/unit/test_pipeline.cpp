// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "glcd/check.hpp"
#include "glcd/pipeline.hpp"
#include "helpers.hpp"

using namespace glcd;
using glcd::testing::bitwise_equal;

namespace {

PipelineConfig small_config() {
    PipelineConfig c;
    c.frames = 12;
    c.channels = 2;
    c.height = 4;
    c.width = 4;
    c.clip_length = 4;
    c.steps = 6;
    c.seed = 17;
    c.denoiser = "linear_gaussian";
    c.vmcr.n_iters = 1;
    return c;
}

// Denoises one path by direct module calls, mirroring the anchor rule.
PathClips compose_path(const PipelineConfig& cfg, Denoiser& d, const DenoiseSchedule& sched, const LatentVideo& z,
                       const std::vector<ClipMap>& maps, int t, int t_next) {
    const WeightProfile w = clip_weights(cfg.clip_length, cfg.weight_profile);
    const bool use_anchor =
        cfg.enable_abam && d.capabilities().exposes_attention && (maps.front().path == PathKind::Local || cfg.abam_on_global);
    std::optional<AnchorKV> anchor;
    PathClips out;
    out.maps = maps;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        DenoiseRequest r;
        r.clip = gather(z, maps[i]);
        r.t = t;
        r.conditioning = cfg.conditioning;
        r.clip_id = maps[i].clip_id;
        r.path = maps[i].path;
        if (use_anchor && i > 0) r.anchor = anchor;
        const DenoisePrediction p = d.denoise(r);
        if (use_anchor && i == 0) anchor = d.capture_kv(r);
        out.clips.push_back(ddim_step(r.clip, p, t, t_next, sched));
        out.weights.push_back(w);
    }
    return out;
}

LatentVideo compose_run(const PipelineConfig& cfg, Denoiser& d) {
    const DenoiseSchedule sched = alpha_schedule(cfg.train_steps, cfg.beta_start, cfg.beta_end).strided(cfg.steps);
    const Shape shape{cfg.frames, cfg.channels, cfg.height, cfg.width};
    const int window = cfg.enable_shuffle ? (cfg.shuffle_window > 0 ? cfg.shuffle_window : cfg.clip_length) : cfg.frames;
    const NoiseInit init = make_noise_init(cfg.seed, shape, window);
    LatentVideo z = cfg.enable_shuffle ? local_noise_shuffle(init, cfg.frames) : init.eps_unit;
    if (cfg.enable_freq_filter) {
        z = frequency_fuse(z, init.eta, make_lpf(cfg.frames, cfg.height, cfg.width, cfg.filter_kind, cfg.filter_cutoff));
    }
    const int dilation = cfg.dilation > 0 ? cfg.dilation : (cfg.frames + cfg.clip_length - 1) / cfg.clip_length;
    const int stride = cfg.stride > 0 ? cfg.stride : std::max(1, cfg.clip_length / 2);
    const ShiftPlan plan{cfg.seed, cfg.per_clip_shift};
    for (int s = 0; s < sched.num_steps(); ++s) {
        const int t = sched.timesteps()[static_cast<std::size_t>(s)];
        const int t_next = sched.target(s);
        const auto local = make_local_maps(cfg.frames, cfg.clip_length, stride, t, plan);
        std::optional<LatentVideo> g, l;
        if (cfg.enable_global) {
            g = fuse_path(compose_path(cfg, d, sched, z, make_global_maps(cfg.frames, cfg.clip_length, dilation, 1 << 16), t, t_next),
                          cfg.frames);
        }
        if (cfg.enable_local) l = fuse_path(compose_path(cfg, d, sched, z, local, t, t_next), cfg.frames);
        LatentVideo next;
        if (g && l) {
            const double gamma = cfg.gamma_override ? *cfg.gamma_override : annealing_gamma(t, cfg.anneal());
            next = glcd_fuse(*g, *l, gamma).latent;
        } else {
            next = g ? *g : *l;
        }
        if (cfg.enable_vmcr) {
            DenoisePrediction pred{LatentVideo(next.shape()), t_next};
            if (t_next > 0) {
                PathClips tiles;
                tiles.maps = local;
                for (const auto& m : local) {
                    DenoiseRequest r;
                    r.clip = gather(next, m);
                    r.t = t_next;
                    r.conditioning = cfg.conditioning;
                    r.clip_id = m.clip_id;
                    r.path = m.path;
                    tiles.clips.push_back(d.denoise(r).eps);
                    tiles.weights.push_back(clip_weights(cfg.clip_length, cfg.weight_profile));
                }
                pred.eps = fuse_path(tiles, cfg.frames);
            }
            next = vmcr_refine(next, pred, t_next, sched, cfg.vmcr).first;
        }
        z = std::move(next);
    }
    return z;
}

// Fails once the call count reaches `limit`.
class FailingDenoiser final : public Denoiser {
public:
    explicit FailingDenoiser(int limit) : limit_(limit) {}
    std::string name() const override { return "failing"; }
    DenoiserCapabilities capabilities() const override { return {false, true, false}; }
    DenoisePrediction denoise(const DenoiseRequest& req) override {
        if (++calls_ > limit_) throw DenoiserError("injected failure");
        return DenoisePrediction{LatentVideo(req.clip.shape()), req.t};
    }

private:
    int limit_;
    int calls_ = 0;
};

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("pipeline equals the hand-composed module sequence") {
    std::mt19937_64 rng(99);
    auto coin = [&] { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
    for (int trial = 0; trial < 24; ++trial) {
        PipelineConfig c = small_config();
        c.seed = rng();
        c.frames = std::uniform_int_distribution<int>(5, 14)(rng);
        c.clip_length = std::uniform_int_distribution<int>(2, std::min(6, c.frames))(rng);
        c.steps = std::uniform_int_distribution<int>(2, 5)(rng);
        c.enable_global = coin();
        c.enable_local = !c.enable_global || coin();
        c.enable_shuffle = coin();
        c.enable_freq_filter = coin();
        c.enable_vmcr = coin() && c.frames >= 3;
        c.enable_abam = coin();
        c.per_clip_shift = coin();
        c.weight_profile = coin() ? WeightKind::Triangular : WeightKind::Uniform;
        c.denoiser = coin() ? "toy_attention" : "linear_gaussian";
        if (coin()) c.gamma_override = 0.3;
        CAPTURE(trial);
        const DenoiseSchedule sched = make_schedule(c);
        auto d1 = make_denoiser(c, sched);
        auto d2 = make_denoiser(c, sched);
        const LatentVideo got = run(c, *d1).z0;
        CHECK(bitwise_equal(got, compose_run(c, *d2)));
    }
}

TEST_CASE("gamma forced to 0 or 1 reduces to a single path") {
    PipelineConfig c = small_config();
    LinearGaussianDenoiser d(make_schedule(c), 0.5, 0.5);
    PipelineConfig local_only = c, global_only = c, g0 = c, g1 = c;
    local_only.enable_global = false;
    global_only.enable_local = false;
    g0.gamma_override = 0.0;
    g1.gamma_override = 1.0;
    CHECK(bitwise_equal(run(g0, d).z0, run(local_only, d).z0));
    CHECK(bitwise_equal(run(g1, d).z0, run(global_only, d).z0));
    CHECK_FALSE(bitwise_equal(run(g0, d).z0, run(g1, d).z0));
}

TEST_CASE("each module flag changes the result") {
    const PipelineConfig base = small_config();
    LinearGaussianDenoiser d(make_schedule(base), 0.5, 0.5);
    const LatentVideo ref = run(base, d).z0;
    for (auto flag : {&PipelineConfig::enable_shuffle, &PipelineConfig::enable_freq_filter, &PipelineConfig::enable_vmcr,
                      &PipelineConfig::enable_global}) {
        PipelineConfig c = base;
        c.*flag = false;
        CHECK_FALSE(bitwise_equal(run(c, d).z0, ref));
    }
}

TEST_CASE("step reports") {
    PipelineConfig c = small_config();
    LinearGaussianDenoiser d(make_schedule(c), 0.5, 0.5);
    const RunResult r = run(c, d);
    REQUIRE(r.reports.size() == 6u);
    CHECK(r.reports.front().gamma > r.reports.back().gamma);
    CHECK(r.reports.back().t_next == 0);
    for (const auto& s : r.reports) {
        CHECK(s.vmcr.has_value());
        CHECK(s.global_clips == 3);
        CHECK(s.local_clips >= 5);
    }
    c.enable_vmcr = false;
    for (const auto& s : run(c, d).reports) CHECK_FALSE(s.vmcr.has_value());

    Pipeline p(c, d);
    PipelineState st = p.initial_state();
    CHECK_FALSE(diagnostics(st).has_value());
    st = p.step(std::move(st));
    REQUIRE(diagnostics(st).has_value());
    CHECK(diagnostics(st)->t == p.schedule().timesteps().front());
}

TEST_CASE("report CSV golden") {
    StepReport a;
    a.step = 0;
    a.t = 801;
    a.t_next = 601;
    a.gamma = 0.25;
    a.residual_global = 1.5;
    a.residual_local = 0.125;
    a.global_clips = 3;
    a.local_clips = 5;
    a.shift = 1;
    a.vmcr = LossReport{2.0, 1.0, 1.0, 0.5, 0.5, 3.0};
    a.wall_ms = 12.5;
    StepReport b = a;
    b.step = 1;
    b.t = 601;
    b.t_next = 0;
    b.vmcr.reset();
    const std::string want =
        "step,t,t_next,gamma,residual_global,residual_local,global_clips,local_clips,shift,"
        "loss_total,loss_pixel,loss_freq,loss_amplitude,loss_phase,grad_norm\n"
        "0,801,601,0.25,1.5,0.125,3,5,1,2,1,1,0.5,0.5,3\n"
        "1,601,0,0.25,1.5,0.125,3,5,1,,,,,,\n";
    CHECK(reports_csv({a, b}) == want);
    const std::string timed = reports_csv({a}, true);
    CHECK(timed.find(",wall_ms\n") != std::string::npos);
    CHECK(timed.find(",12.500\n") != std::string::npos);
}

TEST_CASE("failures carry the completed reports") {
    PipelineConfig c = small_config();
    c.enable_vmcr = false;
    // Global path has 3 clips, local 5 per step: fail inside step 2.
    FailingDenoiser d(2 * (3 + 5) + 1);
    try {
        run(c, d);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.partial_reports().size() == 2u);
        CHECK(std::string(e.what()).find("injected failure") != std::string::npos);
        CHECK(std::string(e.what()).find("step 2") != std::string::npos);
    }
}

TEST_CASE("a refinement blow-up trips the magnitude bound") {
    PipelineConfig c = small_config();
    c.vmcr.omega_motion = 1e9;
    c.denoiser = "seeded_noisy";
    c.noise_scale = 1.0;
    auto d = make_denoiser(c, make_schedule(c));
    CHECK_THROWS_AS(run(c, *d), PipelineError);
}

TEST_CASE("runs are seeded and reproducible") {
    PipelineConfig c = small_config();
    c.denoiser = "seeded_noisy";
    auto d1 = make_denoiser(c, make_schedule(c));
    auto d2 = make_denoiser(c, make_schedule(c));
    const RunResult a = run(c, *d1);
    const RunResult b = run(c, *d2);
    CHECK(bitwise_equal(a.z0, b.z0));
    CHECK(reports_csv(a.reports) == reports_csv(b.reports));
    c.threads = 3;
    CHECK(bitwise_equal(run(c, *d1).z0, a.z0));
    c.seed = 18;
    CHECK_FALSE(bitwise_equal(run(c, *d1).z0, a.z0));
}

TEST_CASE("invalid configuration is reported by key") {
    PipelineConfig c = small_config();
    ZeroDenoiser d;
    c.gamma0 = 2.0;
    CHECK_THROWS_WITH_AS(Pipeline(c, d), doctest::Contains("gamma0"), ConfigError);
    c = small_config();
    c.enable_global = c.enable_local = false;
    CHECK_THROWS_AS(Pipeline(c, d), ConfigError);
}

TEST_CASE("coarse DDIM schedules contract frame means toward the prior mean") {
    // Single clip, no fusion: the exact Gaussian posterior under deterministic
    // DDIM lands closer to mu with fewer steps, and approaches the data spread
    // sigma / sqrt(C*H*W) as steps grow.
    const double mu = 0.5, sigma = 0.5;
    auto distance = [&](int steps) {
        const DenoiseSchedule sched = alpha_schedule(1000, 0.00085, 0.012).strided(steps);
        LinearGaussianDenoiser d(sched, mu, sigma);
        double acc = 0.0;
        for (int seed = 0; seed < 20; ++seed) {
            const LatentVideo z0 = check::plain_ddim(gaussian_latent(Shape{8, 4, 8, 8}, 1000 + seed), sched, d);
            double sq = 0.0;
            for (int k = 0; k < z0.frames(); ++k) {
                double m = 0.0;
                for (float v : z0.frame(k)) m += v;
                m /= static_cast<double>(z0.frame(k).size());
                sq += (m - mu) * (m - mu);
            }
            acc += std::sqrt(sq / z0.frames());
        }
        return acc / 20;
    };
    const double coarse = distance(5), fine = distance(50);
    CHECK(coarse < fine);
    CHECK(fine == doctest::Approx(sigma / 16.0).epsilon(0.35));
}

}
