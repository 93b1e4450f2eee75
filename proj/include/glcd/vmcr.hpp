// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include "glcd/latent.hpp"
#include "glcd/schedule.hpp"

namespace glcd {

struct VmcrParams {
    double lambda_f = 0.2;
    double lambda_mse = 0.001;
    double lambda_phase = 1.0;
    double omega_motion = 2e-5;
    int n_iters = 1;
    double eps_guard = 1e-8;
    bool wrap_phase = true;  // wrap phase differences into (-pi, pi]

    void validate() const;
};

/// Adjacent-frame differences of the denoised estimate, stored as a latent
/// with K - 1 frames: frame i = z0[i + 1] - z0[i].
struct MotionVectors {
    LatentVideo deltas;
    int count() const noexcept { return deltas.frames(); }
};

struct LossReport {
    double total = 0.0;
    double pixel = 0.0;
    double freq = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    double grad_norm = 0.0;
};

struct FreqLoss {
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

MotionVectors motion_vectors(const LatentVideo& z0_hat);

/// sum_i (1 - cos(d_i, d_i+1)) + lambda_mse * ||d_i - d_i+1||^2 over
/// flattened frames. A pair whose shorter delta has norm below eps_guard
/// contributes nothing to the cosine part.
double pixel_loss(const MotionVectors& mv, const VmcrParams& p);

/// L1 distances between 2-D spatial spectra (per channel) of adjacent deltas:
/// amplitude sum | |F d_i| - |F d_i+1| |, phase sum |wrap(arg F d_i - arg F d_i+1)|.
FreqLoss freq_loss(const MotionVectors& mv, const VmcrParams& p);

/// total = pixel + lambda_f * (amplitude + lambda_phase * phase).
LossReport motion_loss(const MotionVectors& mv, const VmcrParams& p);

/// Loss of z0_hat and its gradient with respect to z0_hat.
std::pair<LossReport, LatentVideo> motion_loss_and_grad_z0(const LatentVideo& z0_hat, const VmcrParams& p);

/// Gradient of the motion loss with respect to z_t, holding pred.eps fixed so
/// that z0_hat is affine in z_t.
LatentVideo motion_loss_grad(const LatentVideo& z_t, const DenoisePrediction& pred, int t,
                             const DenoiseSchedule& sched, const VmcrParams& p);

/// Loss report of z_t (through z0_hat with fixed eps), grad_norm included.
LossReport motion_loss_at(const LatentVideo& z_t, const DenoisePrediction& pred, int t, const DenoiseSchedule& sched,
                          const VmcrParams& p);

/// n_iters steps of z <- z - omega * grad. Returns the final latent and the
/// loss report evaluated at it.
std::pair<LatentVideo, LossReport> vmcr_refine(const LatentVideo& z, const DenoisePrediction& pred, int t,
                                               const DenoiseSchedule& sched, const VmcrParams& p);

struct DescentStep {
    LatentVideo z;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double omega = 0.0;
    int halvings = 0;
    bool decreased = false;
};

/// One gradient step with backtracking. The initial step size is
/// omega_motion * min(1, ||z||_inf / ||grad||_inf), so the largest update is
/// at most omega_motion * ||z||_inf; it is halved until the loss strictly
/// drops or max_halvings is exhausted (then z is returned unchanged).
DescentStep vmcr_backtracked_step(const LatentVideo& z, const DenoisePrediction& pred, int t,
                                  const DenoiseSchedule& sched, const VmcrParams& p, int max_halvings = 20);

}  // namespace glcd
