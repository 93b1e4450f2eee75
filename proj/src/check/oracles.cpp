// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "glcd/check.hpp"
#include "glcd/errors.hpp"

namespace glcd::check {

std::vector<cdouble> naive_dft(const std::vector<cdouble>& x, const std::vector<int>& dims, bool inverse) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    if (x.size() != n) throw ShapeError("naive_dft: size does not match dims");
    const double sgn = inverse ? 1.0 : -1.0;
    const std::size_t rank = dims.size();

    auto unravel = [&](std::size_t flat, std::vector<int>& idx) {
        for (std::size_t a = rank; a-- > 0;) {
            idx[a] = static_cast<int>(flat % static_cast<std::size_t>(dims[a]));
            flat /= static_cast<std::size_t>(dims[a]);
        }
    };
    std::vector<cdouble> out(n);
    std::vector<int> ki(rank), xi(rank);
    for (std::size_t k = 0; k < n; ++k) {
        unravel(k, ki);
        cdouble acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            unravel(m, xi);
            double turns = 0.0;
            for (std::size_t a = 0; a < rank; ++a) {
                // Reduce modulo the axis length before scaling to keep the angle small.
                const long long prod = static_cast<long long>(ki[a]) * xi[a] % dims[a];
                turns += static_cast<double>(prod) / dims[a];
            }
            const double ang = sgn * 2.0 * std::numbers::pi * turns;
            acc += x[m] * cdouble(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

LatentVideo dense_lsq_fuse(const PathClips& global, const PathClips& local, double gamma, int frames) {
    const PathClips* paths[2] = {&global, &local};
    const double factor[2] = {gamma, 1.0 - gamma};
    Shape shape{};
    bool have_shape = false;
    int rows = 0;
    for (const PathClips* path : paths) {
        for (std::size_t i = 0; i < path->size(); ++i) {
            rows += path->maps[i].length();
            if (!have_shape) {
                shape = path->clips[i].shape().with_frames(frames);
                have_shape = true;
            }
        }
    }
    if (!have_shape) throw ShapeError("dense_lsq_fuse: no clips");
    const auto fs = static_cast<Eigen::Index>(shape.frame_size());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, frames);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(rows, fs);
    int r = 0;
    for (int p = 0; p < 2; ++p) {
        const PathClips& path = *paths[p];
        for (std::size_t i = 0; i < path.size(); ++i) {
            const ClipMap& map = path.maps[i];
            for (int j = 0; j < map.length(); ++j, ++r) {
                // Replicated padding constrains the edge frame it copies.
                const int padded = map.indices[static_cast<std::size_t>(j)];
                const int f = std::clamp(padded - map.pad.left, 0, frames - 1);
                const double w = std::sqrt(factor[p] * path.weights[i][static_cast<std::size_t>(j)]);
                A(r, f) = w;
                const auto src = path.clips[i].frame(j);
                for (Eigen::Index e = 0; e < fs; ++e) B(r, e) = w * static_cast<double>(src[static_cast<std::size_t>(e)]);
            }
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < frames) throw CoverageError("dense_lsq_fuse: system is rank deficient", -1);
    const Eigen::MatrixXd X = qr.solve(B);

    LatentVideo out(shape);
    for (int f = 0; f < frames; ++f) {
        auto dst = out.frame(f);
        for (Eigen::Index e = 0; e < fs; ++e) dst[static_cast<std::size_t>(e)] = static_cast<float>(X(f, e));
    }
    return out;
}

std::vector<double> spectral_split(const LatentVideo& z_T, const LatentVideo& eta, const FrequencyFilter& filter) {
    const int K = z_T.frames(), C = z_T.channels(), H = z_T.height(), W = z_T.width();
    const std::size_t vol = static_cast<std::size_t>(K) * H * W;
    std::vector<double> out(z_T.size());
    for (int c = 0; c < C; ++c) {
        std::vector<cdouble> a(vol), b(vol);
        for (int k = 0; k < K; ++k)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const std::size_t v = (static_cast<std::size_t>(k) * H + y) * W + x;
                    a[v] = z_T.at(k, c, y, x);
                    b[v] = eta.at(k, c, y, x);
                }
        const auto fa = naive_dft(a, {K, H, W}, false);
        const auto fb = naive_dft(b, {K, H, W}, false);
        std::vector<cdouble> mix(vol);
        for (int k = 0; k < K; ++k)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const std::size_t v = (static_cast<std::size_t>(k) * H + y) * W + x;
                    const double h = filter.at(k, y, x);
                    mix[v] = fa[v] * h + fb[v] * (1.0 - h);
                }
        const auto back = naive_dft(mix, {K, H, W}, true);
        for (int k = 0; k < K; ++k)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const std::size_t v = (static_cast<std::size_t>(k) * H + y) * W + x;
                    out[z_T.offset(k, c, y, x)] = back[v].real() / static_cast<double>(vol);
                }
    }
    return out;
}

double motion_loss_f64(const std::vector<double>& z0, Shape s, const VmcrParams& p) {
    const int K = s.frames, C = s.channels, H = s.height, W = s.width;
    const std::size_t fs = s.frame_size();
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    std::vector<std::vector<double>> d(static_cast<std::size_t>(K - 1), std::vector<double>(fs));
    for (int i = 0; i + 1 < K; ++i)
        for (std::size_t e = 0; e < fs; ++e) d[static_cast<std::size_t>(i)][e] = z0[(i + 1) * fs + e] - z0[i * fs + e];

    double pixel = 0.0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        double ab = 0.0, aa = 0.0, bb = 0.0, sq = 0.0;
        for (std::size_t e = 0; e < fs; ++e) {
            ab += d[i][e] * d[i + 1][e];
            aa += d[i][e] * d[i][e];
            bb += d[i + 1][e] * d[i + 1][e];
            sq += (d[i][e] - d[i + 1][e]) * (d[i][e] - d[i + 1][e]);
        }
        const double na = std::sqrt(aa), nb = std::sqrt(bb);
        if (na >= p.eps_guard && nb >= p.eps_guard) pixel += 1.0 - ab / (na * nb);
        pixel += p.lambda_mse * sq;
    }

    // spectra[i][c] = 2-D DFT of channel c of delta i
    std::vector<std::vector<std::vector<cdouble>>> spectra(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (int c = 0; c < C; ++c) {
            std::vector<cdouble> x(plane);
            for (std::size_t e = 0; e < plane; ++e) x[e] = d[i][static_cast<std::size_t>(c) * plane + e];
            spectra[i].push_back(naive_dft(x, {H, W}, false));
        }
    }
    double amp = 0.0, phase = 0.0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        for (int c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < plane; ++k) {
                const cdouble a = spectra[i][static_cast<std::size_t>(c)][k];
                const cdouble b = spectra[i + 1][static_cast<std::size_t>(c)][k];
                amp += std::abs(std::abs(a) - std::abs(b));
                double dphi = std::arg(a) - std::arg(b);
                if (p.wrap_phase) {
                    // Into (-pi, pi] by explicit turn counting.
                    const double two_pi = 2.0 * std::numbers::pi;
                    dphi -= two_pi * std::ceil((dphi - std::numbers::pi) / two_pi);
                }
                phase += std::abs(dphi);
            }
        }
    }
    return pixel + p.lambda_f * (amp + p.lambda_phase * phase);
}

std::vector<double> fd_motion_grad(const LatentVideo& z_t, const LatentVideo& eps, double alpha_bar,
                                   const VmcrParams& p, double h) {
    const double sa = std::sqrt(alpha_bar);
    const double sb = std::sqrt(1.0 - alpha_bar);
    std::vector<double> zt(z_t.data().begin(), z_t.data().end());
    auto loss = [&](const std::vector<double>& z) {
        std::vector<double> z0(z.size());
        for (std::size_t e = 0; e < z.size(); ++e) z0[e] = (z[e] - sb * eps.data()[e]) / sa;
        return motion_loss_f64(z0, z_t.shape(), p);
    };
    std::vector<double> g(zt.size());
    for (std::size_t e = 0; e < zt.size(); ++e) {
        const double keep = zt[e];
        zt[e] = keep + h;
        const double up = loss(zt);
        zt[e] = keep - h;
        const double down = loss(zt);
        zt[e] = keep;
        g[e] = (up - down) / (2.0 * h);
    }
    return g;
}

LatentVideo plain_ddim(LatentVideo z, const DenoiseSchedule& sched, Denoiser& denoiser) {
    for (int i = 0; i < sched.num_steps(); ++i) {
        const int t = sched.timesteps()[static_cast<std::size_t>(i)];
        DenoiseRequest req;
        req.clip = z;
        req.t = t;
        req.clip_id = 0;
        req.path = PathKind::Local;
        const DenoisePrediction pred = denoiser.denoise(req);
        z = ddim_step(z, pred, t, sched.target(i), sched);
    }
    return z;
}

std::vector<double> ddim_step_f64(const LatentVideo& z, const LatentVideo& eps, double ab_from, double ab_to) {
    std::vector<double> out(z.size());
    for (std::size_t e = 0; e < out.size(); ++e) {
        const double x0 = (z.data()[e] - std::sqrt(1.0 - ab_from) * eps.data()[e]) / std::sqrt(ab_from);
        out[e] = std::sqrt(ab_to) * x0 + std::sqrt(1.0 - ab_to) * eps.data()[e];
    }
    return out;
}

}  // namespace glcd::check
