// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "glcd/check.hpp"
#include "glcd/config.hpp"
#include "glcd/fft.hpp"
#include "glcd/io.hpp"
#include "glcd/metrics.hpp"

namespace glcd::check {
namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

LatentVideo random_latent(Rng& rng, Shape s, float scale = 1.0f) {
    std::normal_distribution<float> n(0.0f, scale);
    LatentVideo z(s);
    for (float& v : z.data()) v = n(rng);
    return z;
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

double max_abs(std::span<const float> a) {
    double m = 0.0;
    for (float v : a) m = std::max(m, std::abs(static_cast<double>(v)));
    return m;
}

bool bitwise_equal(const LatentVideo& a, const LatentVideo& b) {
    return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

PathClips random_path(Rng& rng, const std::vector<ClipMap>& maps, Shape frame_shape, bool random_weights) {
    PathClips p;
    std::uniform_real_distribution<float> w(0.1f, 2.0f);
    for (const auto& m : maps) {
        p.maps.push_back(m);
        p.clips.push_back(random_latent(rng, frame_shape.with_frames(m.length())));
        std::vector<float> values(static_cast<std::size_t>(m.length()), 1.0f);
        if (random_weights)
            for (float& v : values) v = w(rng);
        p.weights.emplace_back(std::move(values));
    }
    return p;
}

// Weight sum per frame with padding folded onto the edge, unit weights.
std::vector<int> folded_coverage(const std::vector<ClipMap>& maps, int frames) {
    std::vector<int> count(static_cast<std::size_t>(frames), 0);
    for (const auto& m : maps)
        for (int j = 0; j < m.length(); ++j) ++count[static_cast<std::size_t>(m.source_frame(j))];
    return count;
}

// Maps holding each original frame index, padding excluded.
std::vector<int> real_coverage(const std::vector<ClipMap>& maps, int frames) {
    std::vector<int> count(static_cast<std::size_t>(frames), 0);
    for (const auto& m : maps)
        for (int j = 0; j < m.length(); ++j)
            if (m.is_real(j)) ++count[static_cast<std::size_t>(m.source_frame(j))];
    return count;
}

// 1. Fusion oracle equivalence.
CriterionResult fusion() {
    Timer timer;
    Rng rng(0x6675736eull);
    const double gammas[] = {0.0, 0.005, 0.5, 1.0};
    const int instances = 64;
    double worst_brute = 0.0;
    double worst_closed = 0.0;
    long long closed_pixels = 0;
    for (int n = 0; n < instances; ++n) {
        const int K = uniform_int(rng, 2, 32);
        const int L = uniform_int(rng, 1, std::min(8, K));
        const int dmin = (K + L - 1) / L;
        const int d = uniform_int(rng, dmin, std::min(K, dmin + 3));
        const int stride = uniform_int(rng, 1, L);
        const int t = uniform_int(rng, 1, 1000);
        const ShiftPlan plan{rng(), uniform_int(rng, 0, 1) == 1};
        const Shape fshape{1, uniform_int(rng, 1, 2), uniform_int(rng, 1, 3), uniform_int(rng, 1, 3)};
        const double gamma = gammas[n % 4];
        const auto gmaps = make_global_maps(K, L, d);
        const auto lmaps = make_local_maps(K, L, stride, t, plan);

        const PathClips g = random_path(rng, gmaps, fshape, true);
        const PathClips l = random_path(rng, lmaps, fshape, true);
        const LatentVideo brute = brute_force_fuse(g, l, gamma, K);
        const LatentVideo dense = dense_lsq_fuse(g, l, gamma, K);
        worst_brute = std::max(worst_brute, max_abs_diff(brute.data(), dense.data()) / std::max(1e-30, max_abs(dense.data())));

        // Closed form against the oracle wherever both paths carry the same weight sum.
        const PathClips gu = random_path(rng, gmaps, fshape, false);
        const PathClips lu = random_path(rng, lmaps, fshape, false);
        const LatentVideo closed = glcd_fuse(fuse_path(gu, K), fuse_path(lu, K), gamma).latent;
        const LatentVideo ref = dense_lsq_fuse(gu, lu, gamma, K);
        const auto cg = folded_coverage(gmaps, K);
        const auto cl = folded_coverage(lmaps, K);
        const double scale = std::max(1e-30, max_abs(ref.data()));
        for (int f = 0; f < K; ++f) {
            if (cg[static_cast<std::size_t>(f)] != cl[static_cast<std::size_t>(f)]) continue;
            const double diff = max_abs_diff(closed.frame(f), ref.frame(f));
            worst_closed = std::max(worst_closed, diff / scale);
            closed_pixels += static_cast<long long>(fshape.frame_size());
        }
    }
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = worst_brute < 1e-5 && worst_closed < 1e-5 && closed_pixels > 0 && r.seconds < 30.0;
    r.detail = fmt::format("{} instances, brute-force rel err {:.2e}, closed-form rel err {:.2e} over {} pixels, {:.2f}s",
                           instances, worst_brute, worst_closed, closed_pixels, r.seconds);
    return r;
}

// 2. VMCR analytic gradient against central differences of the 64-bit loss.
CriterionResult vmcr_gradient() {
    Timer timer;
    Rng rng(0x67726164ull);
    const DenoiseSchedule sched = alpha_schedule(1000, 0.00085, 0.012);
    const VmcrParams p{};
    const int instances = 24;
    double worst = 0.0;
    for (int n = 0; n < instances; ++n) {
        const bool largest = n == 0;
        const int K = largest ? 6 : uniform_int(rng, 3, 6);
        const int C = largest ? 2 : uniform_int(rng, 1, 2);
        const int HW = largest ? 8 : uniform_int(rng, 2, 8);
        const Shape s{K, C, HW, HW};
        const int t = uniform_int(rng, 50, 950);
        const LatentVideo z_t = random_latent(rng, s);
        const LatentVideo eps = random_latent(rng, s);
        const LatentVideo g = motion_loss_grad(z_t, DenoisePrediction{eps, t}, t, sched, p);
        const auto fd = fd_motion_grad(z_t, eps, sched.alpha_bar(t), p, 1e-3);
        double num = 0.0, den = 0.0;
        for (std::size_t e = 0; e < fd.size(); ++e) {
            num = std::max(num, std::abs(g.data()[e] - fd[e]));
            den = std::max(den, std::abs(fd[e]));
        }
        worst = std::max(worst, num / std::max(den, 1e-300));
    }
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = worst < 1e-3 && r.seconds < 60.0;
    r.detail = fmt::format("{} instances, max relative error {:.2e}, {:.2f}s", instances, worst, r.seconds);
    return r;
}

// 3. A backtracked VMCR step strictly decreases the loss.
CriterionResult descent() {
    Timer timer;
    Rng rng(0x64657363ull);
    const DenoiseSchedule sched = alpha_schedule(1000, 0.00085, 0.012);
    const VmcrParams p{};
    const int instances = 100;
    int decreased = 0;
    int most_halvings = 0;
    for (int n = 0; n < instances; ++n) {
        const Shape s{uniform_int(rng, 3, 8), uniform_int(rng, 1, 4), uniform_int(rng, 2, 8), uniform_int(rng, 2, 8)};
        const int t = uniform_int(rng, 1, 1000);
        const LatentVideo z = random_latent(rng, s);
        const LatentVideo eps = random_latent(rng, s);
        const DescentStep step = vmcr_backtracked_step(z, DenoisePrediction{eps, t}, t, sched, p, 20);
        if (step.decreased && step.loss_after < step.loss_before && step.omega <= p.omega_motion) ++decreased;
        most_halvings = std::max(most_halvings, step.halvings);
    }
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = decreased == instances;
    r.detail = fmt::format("{}/{} instances decreased, at most {} halvings, {:.2f}s", decreased, instances,
                           most_halvings, r.seconds);
    return r;
}

// 4. FFT round trip, frequency-fusion identities and the per-bin oracle.
CriterionResult spectral() {
    Timer timer;
    Rng rng(0x73706563ull);
    double round_trip = 0.0;
    for (int n = 0; n < 20; ++n) {
        const int d0 = uniform_int(rng, 1, 9), d1 = uniform_int(rng, 1, 9), d2 = uniform_int(rng, 1, 9);
        const LatentVideo x = random_latent(rng, Shape{1, 1, 1, d0 * d1 * d2});
        float imag = 0.0f;
        const auto back = fft::inverse3d_real(fft::forward3d(x.data(), d0, d1, d2), d0, d1, d2, imag);
        round_trip = std::max(round_trip, max_abs_diff(back, x.data()));
    }

    double identity = 0.0;
    double split = 0.0;
    for (int n = 0; n < 20; ++n) {
        const Shape s{uniform_int(rng, 1, 8), uniform_int(rng, 1, 2), uniform_int(rng, 1, 6), uniform_int(rng, 1, 6)};
        const LatentVideo z = random_latent(rng, s);
        const LatentVideo eta = random_latent(rng, s);
        const double cutoff = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
        const auto pass = make_lpf(s.frames, s.height, s.width, FilterKind::AllPass, cutoff);
        const auto stop = make_lpf(s.frames, s.height, s.width, FilterKind::AllStop, cutoff);
        const auto kind = n % 2 == 0 ? FilterKind::GaussianLP : FilterKind::IdealBoxLP;
        const auto lpf = make_lpf(s.frames, s.height, s.width, kind, cutoff);
        identity = std::max(identity, max_abs_diff(frequency_fuse(z, eta, pass).data(), z.data()));
        identity = std::max(identity, max_abs_diff(frequency_fuse(z, eta, stop).data(), eta.data()));
        identity = std::max(identity, max_abs_diff(frequency_fuse(z, z, lpf).data(), z.data()));

        const LatentVideo fused = frequency_fuse(z, eta, lpf);
        const auto ref = spectral_split(z, eta, lpf);
        for (std::size_t e = 0; e < ref.size(); ++e) split = std::max(split, std::abs(fused.data()[e] - ref[e]));
    }
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = round_trip <= 1e-5 && identity <= 1e-5 && split <= 1e-5;
    r.detail = fmt::format("round trip {:.2e}, identities {:.2e}, per-bin oracle {:.2e}, {:.2f}s", round_trip, identity,
                           split, r.seconds);
    return r;
}

struct Artifacts {
    std::string npy, report, metrics;
    std::vector<std::string> ppm;
    bool operator==(const Artifacts&) const = default;
};

Artifacts run_artifacts(const PipelineConfig& cfg) {
    auto denoiser = make_denoiser(cfg, make_schedule(cfg));
    const RunResult res = run(cfg, *denoiser);
    const Shape s = res.z0.shape();
    const std::int64_t dims[4] = {s.frames, s.channels, s.height, s.width};
    Artifacts a{encode_npy(dims, res.z0.data()), reports_csv(res.reports), metrics_csv(compute_metrics(res.z0)), {}};
    for (int k = 0; k < s.frames; ++k) a.ppm.push_back(encode_ppm(res.z0, k, Normalize::MinMax));
    return a;
}

// 5. Coverage of random map tuples and bit-identical repeated runs.
CriterionResult coverage() {
    Timer timer;
    Rng rng(0x636f7665ull);
    int covered = 0;
    const int tuples = 1000;
    for (int n = 0; n < tuples; ++n) {
        const int K = uniform_int(rng, 1, 64);
        const int L = uniform_int(rng, 1, K);
        const int stride = uniform_int(rng, 1, L);
        const ShiftPlan plan{rng(), uniform_int(rng, 0, 1) == 1};
        const int t = uniform_int(rng, 0, 1000);
        const int dmin = (K + L - 1) / L;
        const int d = uniform_int(rng, dmin, K);
        const auto cl = real_coverage(make_local_maps(K, L, stride, t, plan), K);
        const auto cg = real_coverage(make_global_maps(K, L, d), K);
        const bool ok = std::all_of(cl.begin(), cl.end(), [](int c) { return c >= 1; }) &&
                        std::all_of(cg.begin(), cg.end(), [](int c) { return c == 1; });
        covered += ok ? 1 : 0;
    }

    PipelineConfig cfg;
    cfg.frames = 12;
    cfg.clip_length = 4;
    cfg.channels = 3;
    cfg.height = 6;
    cfg.width = 6;
    cfg.steps = 4;
    cfg.seed = 20260101;
    cfg.denoiser = "toy_attention";
    const bool same_toy = run_artifacts(cfg) == run_artifacts(cfg);
    cfg.denoiser = "seeded_noisy";
    cfg.per_clip_shift = true;
    const Artifacts serial = run_artifacts(cfg);
    cfg.threads = 4;
    const bool same_parallel = serial == run_artifacts(cfg);

    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = covered == tuples && same_toy && same_parallel;
    r.detail = fmt::format("{}/{} tuples covered, repeated runs {}, serial vs 4 threads {}, {:.2f}s", covered, tuples,
                           same_toy ? "identical" : "DIFFER", same_parallel ? "identical" : "DIFFER", r.seconds);
    return r;
}

// 6. Degenerate configuration reduces to plain DDIM bit for bit.
CriterionResult degenerate() {
    Timer timer;
    int matched = 0, total = 0;
    std::string failures;
    for (int T : {5, 50}) {
        for (const char* name : {"zero", "linear_gaussian", "toy_attention"}) {
            PipelineConfig cfg;
            cfg.frames = 8;
            cfg.clip_length = 8;
            cfg.dilation = 1;
            cfg.steps = T;
            cfg.seed = 77;
            cfg.enable_shuffle = false;
            cfg.enable_freq_filter = false;
            cfg.enable_vmcr = false;
            cfg.enable_abam = false;
            cfg.denoiser = name;
            const DenoiseSchedule sched = make_schedule(cfg);
            auto denoiser = make_denoiser(cfg, sched);
            const LatentVideo z0 = run(cfg, *denoiser).z0;
            auto reference_denoiser = make_denoiser(cfg, sched);
            const LatentVideo ref = plain_ddim(initial_latent(cfg), sched, *reference_denoiser);
            ++total;
            if (bitwise_equal(z0, ref)) {
                ++matched;
            } else {
                failures += fmt::format(" {}@T={}", name, T);
            }
        }
    }
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = matched == total;
    r.detail = fmt::format("{}/{} bitwise equal{}, {:.2f}s", matched, total, failures.empty() ? "" : " (" + failures + ")",
                           r.seconds);
    return r;
}

// 7. Convergence of the analytic Gaussian denoiser.
CriterionResult convergence() {
    Timer timer;
    const double mu = 0.5;
    const int seeds = 20;
    std::vector<double> err;
    std::string per_T;
    for (int T : {5, 10, 50}) {
        double acc = 0.0;
        for (int seed = 0; seed < seeds; ++seed) {
            PipelineConfig cfg;
            cfg.frames = 24;
            cfg.clip_length = 8;
            cfg.steps = T;
            cfg.seed = static_cast<std::uint64_t>(1000 + seed);
            cfg.denoiser = "linear_gaussian";
            cfg.denoiser_mu = mu;
            auto denoiser = make_denoiser(cfg, make_schedule(cfg));
            const LatentVideo z0 = run(cfg, *denoiser).z0;
            double sq = 0.0;
            for (int k = 0; k < z0.frames(); ++k) {
                double m = 0.0;
                for (float v : z0.frame(k)) m += v;
                m /= static_cast<double>(z0.frame(k).size());
                sq += (m - mu) * (m - mu);
            }
            acc += std::sqrt(sq / z0.frames());
        }
        err.push_back(acc / seeds);
        per_T += fmt::format(" T={}:{:.4f}", T, err.back());
    }
    const bool close = err[2] < 0.15;
    const bool monotone = err[0] > err[1] && err[1] > err[2];
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = close && monotone && r.seconds < 120.0;
    r.detail = fmt::format("mean per-frame RMS |mean - mu| over {} seeds:{}; T=50 below 0.15: {}, decreasing in T: {}, "
                           "{:.2f}s",
                           seeds, per_T, close ? "yes" : "no", monotone ? "yes" : "no", r.seconds);
    return r;
}

// 8. Defaults resolved from an empty config file.
CriterionResult defaults() {
    Timer timer;
    const auto path = std::filesystem::temp_directory_path() / fmt::format("glcd-empty-{}.yaml", ::getpid());
    { std::ofstream touch(path); }
    PipelineConfig cfg;
    try {
        cfg = load_config(path.string());
    } catch (...) {
        std::filesystem::remove(path);
        throw;
    }
    std::filesystem::remove(path);
    const bool exact = cfg.gamma0 == 0.005 && cfg.beta_anneal == 0.0005 && cfg.lambda_anchor == 0.1 &&
                       cfg.vmcr.lambda_f == 0.2 && cfg.vmcr.lambda_mse == 0.001 && cfg.vmcr.lambda_phase == 1.0 &&
                       cfg.vmcr.omega_motion == 2e-5 && cfg.vmcr.n_iters == 1;
    CriterionResult r;
    r.seconds = timer.seconds();
    r.pass = exact;
    r.detail = fmt::format("gamma0={} beta={} lambda={} lambda_f={} lambda_mse={} lambda_phase={} omega={}", cfg.gamma0,
                           cfg.beta_anneal, cfg.lambda_anchor, cfg.vmcr.lambda_f, cfg.vmcr.lambda_mse,
                           cfg.vmcr.lambda_phase, cfg.vmcr.omega_motion);
    return r;
}

}  // namespace

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "fusion", fusion},
        {2, "vmcr-gradient", vmcr_gradient},
        {3, "descent", descent},
        {4, "spectral", spectral},
        {5, "coverage", coverage},
        {6, "degenerate", degenerate},
        {7, "convergence", convergence},
        {8, "defaults", defaults},
    };
    return all;
}

std::vector<CriterionResult> run_criteria(std::string_view filter) {
    std::vector<CriterionResult> out;
    for (const auto& c : criteria()) {
        if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
        CriterionResult r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = fmt::format("error: {}", e.what());
        }
        r.id = c.id;
        r.name = c.name;
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    return fmt::format("[{}] criterion {} {}: {}", r.pass ? "PASS" : "FAIL", r.id, r.name, r.detail);
}

}  // namespace glcd::check
