// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/vmcr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "glcd/errors.hpp"
#include "glcd/fft.hpp"

namespace glcd {

namespace {

using fft::cfloat;

constexpr double kPi = std::numbers::pi;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
    return acc;
}

struct Spectra {
    int planes = 0;  // deltas * channels
    std::size_t bins = 0;
    std::vector<std::vector<cfloat>> data;  // [delta * C + c]
};

Spectra delta_spectra(const MotionVectors& mv) {
    const auto& d = mv.deltas;
    const std::size_t plane = static_cast<std::size_t>(d.height()) * d.width();
    Spectra s;
    s.planes = d.frames() * d.channels();
    s.bins = plane;
    s.data.reserve(static_cast<std::size_t>(s.planes));
    for (int i = 0; i < d.frames(); ++i)
        for (int c = 0; c < d.channels(); ++c)
            s.data.push_back(fft::forward2d(d.frame(i).subspan(static_cast<std::size_t>(c) * plane, plane),
                                            d.height(), d.width()));
    return s;
}

double phase_difference(float a, float b, bool wrap) {
    const double raw = static_cast<double>(a) - b;
    return wrap ? wrap_angle(raw) : raw;
}

// Loss over the deltas; when `grad` is non-null it receives d loss / d delta.
LossReport evaluate(const MotionVectors& mv, const VmcrParams& p, LatentVideo* grad) {
    const auto& d = mv.deltas;
    const int n = d.frames();
    if (n < 2) throw ShapeError("motion loss needs at least two motion vectors (K >= 3)");
    LossReport r;

    // Pixel-wise: cosine + squared difference.
    for (int i = 0; i + 1 < n; ++i) {
        auto a = d.frame(i);
        auto b = d.frame(i + 1);
        const double na = std::sqrt(dot(a, a));
        const double nb = std::sqrt(dot(b, b));
        const bool cos_active = na >= p.eps_guard && nb >= p.eps_guard;
        double cosv = 0.0;
        if (cos_active) {
            cosv = dot(a, b) / (na * nb);
            r.pixel += 1.0 - cosv;
        }
        double sq = 0.0;
        for (std::size_t e = 0; e < a.size(); ++e) {
            const double diff = static_cast<double>(a[e]) - b[e];
            sq += diff * diff;
        }
        r.pixel += p.lambda_mse * sq;

        if (grad != nullptr) {
            auto ga = grad->frame(i);
            auto gb = grad->frame(i + 1);
            const double inv_ab = cos_active ? 1.0 / (na * nb) : 0.0;
            const double ca = cos_active ? cosv / (na * na) : 0.0;
            const double cb = cos_active ? cosv / (nb * nb) : 0.0;
            for (std::size_t e = 0; e < a.size(); ++e) {
                const double ae = a[e], be = b[e];
                const double mse = 2.0 * p.lambda_mse * (ae - be);
                ga[e] += static_cast<float>(-(be * inv_ab - ca * ae) + mse);
                gb[e] += static_cast<float>(-(ae * inv_ab - cb * be) - mse);
            }
        }
    }

    // Frequency-wise: amplitude and phase of the 2-D spatial spectra.
    const int C = d.channels();
    const Spectra spec = delta_spectra(mv);
    std::vector<std::vector<cfloat>> g_spec;
    if (grad != nullptr) g_spec.assign(spec.data.size(), std::vector<cfloat>(spec.bins, cfloat{}));
    const double w_amp = p.lambda_f;
    const double w_phase = p.lambda_f * p.lambda_phase;

    for (int i = 0; i + 1 < n; ++i) {
        for (int c = 0; c < C; ++c) {
            const auto ia = static_cast<std::size_t>(i * C + c);
            const auto ib = static_cast<std::size_t>((i + 1) * C + c);
            const auto& fa = spec.data[ia];
            const auto& fb = spec.data[ib];
            for (std::size_t k = 0; k < spec.bins; ++k) {
                const double amp_a = std::abs(fa[k]);
                const double amp_b = std::abs(fb[k]);
                const double amp_diff = amp_a - amp_b;
                r.amplitude += std::abs(amp_diff);
                const double dphi = phase_difference(std::arg(fa[k]), std::arg(fb[k]), p.wrap_phase);
                r.phase += std::abs(dphi);

                if (grad != nullptr) {
                    const double sa = sign(amp_diff);
                    const double sp = sign(dphi);
                    // d|F|/d(Re, Im) = F/|F|, d arg F/d(Re, Im) = i F/|F|^2.
                    if (amp_a > 0.0) {
                        const std::complex<double> F(fa[k].real(), fa[k].imag());
                        const std::complex<double> g = w_amp * sa * F / amp_a +
                                                       w_phase * sp * std::complex<double>(0.0, 1.0) * F / (amp_a * amp_a);
                        g_spec[ia][k] += cfloat(static_cast<float>(g.real()), static_cast<float>(g.imag()));
                    }
                    if (amp_b > 0.0) {
                        const std::complex<double> F(fb[k].real(), fb[k].imag());
                        const std::complex<double> g = -w_amp * sa * F / amp_b -
                                                       w_phase * sp * std::complex<double>(0.0, 1.0) * F / (amp_b * amp_b);
                        g_spec[ib][k] += cfloat(static_cast<float>(g.real()), static_cast<float>(g.imag()));
                    }
                }
            }
        }
    }
    r.freq = r.amplitude + p.lambda_phase * r.phase;
    r.total = r.pixel + p.lambda_f * r.freq;

    if (grad != nullptr) {
        const std::size_t plane = spec.bins;
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < C; ++c) {
                auto& gs = g_spec[static_cast<std::size_t>(i * C + c)];
                const auto back = fft::adjoint2d_real(std::move(gs), d.height(), d.width());
                auto dst = grad->frame(i).subspan(static_cast<std::size_t>(c) * plane, plane);
                for (std::size_t e = 0; e < plane; ++e) dst[e] += back[e];
            }
        }
    }
    if (!std::isfinite(r.total)) throw NumericError("motion loss is not finite");
    return r;
}

double l2(const LatentVideo& z) {
    return std::sqrt(dot(z.data(), z.data()));
}

}  // namespace

void VmcrParams::validate() const {
    if (!(lambda_f >= 0.0) || !(lambda_mse >= 0.0) || !(lambda_phase >= 0.0) || !(omega_motion >= 0.0)) {
        throw ParameterError("VMCR weights and step size must be >= 0");
    }
    if (n_iters < 0) throw ParameterError("VMCR iteration count must be >= 0");
    if (!(eps_guard > 0.0)) throw ParameterError("VMCR cosine guard must be > 0");
}

double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

MotionVectors motion_vectors(const LatentVideo& z0_hat) {
    if (z0_hat.frames() < 2) throw ShapeError("motion vectors need at least two frames");
    LatentVideo deltas(z0_hat.shape().with_frames(z0_hat.frames() - 1));
    for (int i = 0; i + 1 < z0_hat.frames(); ++i) {
        auto a = z0_hat.frame(i);
        auto b = z0_hat.frame(i + 1);
        auto dst = deltas.frame(i);
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] = b[e] - a[e];
    }
    return MotionVectors{std::move(deltas)};
}

double pixel_loss(const MotionVectors& mv, const VmcrParams& p) {
    VmcrParams q = p;
    q.lambda_f = 0.0;
    return evaluate(mv, q, nullptr).pixel;
}

FreqLoss freq_loss(const MotionVectors& mv, const VmcrParams& p) {
    const LossReport r = evaluate(mv, p, nullptr);
    return FreqLoss{r.amplitude, r.phase};
}

LossReport motion_loss(const MotionVectors& mv, const VmcrParams& p) {
    return evaluate(mv, p, nullptr);
}

std::pair<LossReport, LatentVideo> motion_loss_and_grad_z0(const LatentVideo& z0_hat, const VmcrParams& p) {
    const MotionVectors mv = motion_vectors(z0_hat);
    LatentVideo g_delta(mv.deltas.shape());
    LossReport r = evaluate(mv, p, &g_delta);

    // delta_i = z0[i+1] - z0[i]  =>  dL/dz0[k] = g[k-1] - g[k].
    LatentVideo g(z0_hat.shape());
    for (int k = 0; k < z0_hat.frames(); ++k) {
        auto dst = g.frame(k);
        if (k > 0) {
            auto prev = g_delta.frame(k - 1);
            for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += prev[e];
        }
        if (k + 1 < z0_hat.frames()) {
            auto cur = g_delta.frame(k);
            for (std::size_t e = 0; e < dst.size(); ++e) dst[e] -= cur[e];
        }
    }
    r.grad_norm = l2(g);
    return {r, std::move(g)};
}

namespace {

std::pair<LossReport, LatentVideo> loss_and_grad_zt(const LatentVideo& z_t, const DenoisePrediction& pred, int t,
                                                    const DenoiseSchedule& sched, const VmcrParams& p) {
    const LatentVideo z0 = predict_z0(z_t, pred, t, sched);
    auto [report, g] = motion_loss_and_grad_z0(z0, p);
    const auto scale = static_cast<float>(1.0 / std::sqrt(sched.alpha_bar(t)));
    for (float& v : g.data()) v *= scale;
    report.grad_norm = l2(g);
    if (!g.all_finite()) throw NumericError(fmt::format("VMCR gradient is not finite at t={}", t));
    return {report, std::move(g)};
}

}  // namespace

LatentVideo motion_loss_grad(const LatentVideo& z_t, const DenoisePrediction& pred, int t,
                             const DenoiseSchedule& sched, const VmcrParams& p) {
    return loss_and_grad_zt(z_t, pred, t, sched, p).second;
}

LossReport motion_loss_at(const LatentVideo& z_t, const DenoisePrediction& pred, int t, const DenoiseSchedule& sched,
                          const VmcrParams& p) {
    return loss_and_grad_zt(z_t, pred, t, sched, p).first;
}

std::pair<LatentVideo, LossReport> vmcr_refine(const LatentVideo& z, const DenoisePrediction& pred, int t,
                                               const DenoiseSchedule& sched, const VmcrParams& p) {
    p.validate();
    LatentVideo cur = z;
    const auto omega = static_cast<float>(p.omega_motion);
    for (int it = 0; it < p.n_iters; ++it) {
        LatentVideo g;
        try {
            g = loss_and_grad_zt(cur, pred, t, sched, p).second;
        } catch (const NumericError& e) {
            throw NumericError(fmt::format("VMCR iteration {} at t={}: {}", it, t, e.what()));
        }
        if (omega != 0.0f) {
            auto dst = cur.data();
            auto src = g.data();
            for (std::size_t e = 0; e < dst.size(); ++e) dst[e] -= omega * src[e];
        }
    }
    LossReport report;
    try {
        report = loss_and_grad_zt(cur, pred, t, sched, p).first;
    } catch (const NumericError& e) {
        throw NumericError(fmt::format("VMCR after {} iterations at t={}: {}", p.n_iters, t, e.what()));
    }
    return {std::move(cur), report};
}

DescentStep vmcr_backtracked_step(const LatentVideo& z, const DenoisePrediction& pred, int t,
                                  const DenoiseSchedule& sched, const VmcrParams& p, int max_halvings) {
    p.validate();
    auto [before, g] = loss_and_grad_zt(z, pred, t, sched, p);
    DescentStep out;
    out.z = z;
    out.loss_before = before.total;
    out.loss_after = before.total;
    const double g_inf = g.max_abs();
    if (!(g_inf > 0.0)) return out;
    double omega = p.omega_motion * std::min(1.0, z.max_abs() / g_inf);
    for (int h = 0; h <= max_halvings; ++h, omega *= 0.5) {
        LatentVideo trial = z;
        auto dst = trial.data();
        auto src = g.data();
        const auto w = static_cast<float>(omega);
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] -= w * src[e];
        const double after = loss_and_grad_zt(trial, pred, t, sched, p).first.total;
        if (after < before.total) {
            out.z = std::move(trial);
            out.loss_after = after;
            out.omega = omega;
            out.halvings = h;
            out.decreased = true;
            return out;
        }
    }
    out.halvings = max_halvings;
    return out;
}

}  // namespace glcd
