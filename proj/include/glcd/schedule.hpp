// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "glcd/latent.hpp"

namespace glcd {

/// Cumulative noise table for deterministic DDIM sampling.
///
/// `alpha_bar(t)` is defined for t in [0, T] with alpha_bar(0) == 1. The
/// visited timesteps are stored in strictly decreasing order; the step taken
/// from `timesteps()[i]` lands on `target(i)`, which is 0 for the last entry.
class DenoiseSchedule {
public:
    DenoiseSchedule(std::vector<double> alpha_bar, std::vector<int> timesteps);

    int train_steps() const noexcept { return static_cast<int>(alpha_bar_.size()) - 1; }
    double alpha_bar(int t) const;
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

    const std::vector<int>& timesteps() const noexcept { return timesteps_; }
    int num_steps() const noexcept { return static_cast<int>(timesteps_.size()); }
    int target(int step) const;

    /// Same table, visiting `num_steps` timesteps with uniform stride
    /// (t_i = i*T/num_steps for i = num_steps..1).
    DenoiseSchedule strided(int num_steps) const;

private:
    std::vector<double> alpha_bar_;
    std::vector<int> timesteps_;
};

/// Linear-beta table: beta_i interpolated from beta_start to beta_end over
/// i = 1..T, alpha_bar_t = prod_{i<=t} (1 - beta_i). Visits every timestep.
DenoiseSchedule alpha_schedule(int train_steps, double beta_start, double beta_end);

/// Noise prediction Phi(z_t, t, y) for one latent.
struct DenoisePrediction {
    LatentVideo eps;
    int t = 0;
};

/// Deterministic DDIM update from `t_from` to `t_to` (t_to <= t_from).
LatentVideo ddim_step(const LatentVideo& z_t, const DenoisePrediction& pred, int t_from, int t_to,
                      const DenoiseSchedule& sched);

/// Denoised-output estimate z0_hat = (z_t - sqrt(1 - a_t) eps) / sqrt(a_t).
LatentVideo predict_z0(const LatentVideo& z_t, const DenoisePrediction& pred, int t, const DenoiseSchedule& sched);

/// Forward re-noising z_t = sqrt(a_t) z0 + sqrt(1 - a_t) eps.
LatentVideo renoise(const LatentVideo& z0, const LatentVideo& eps, int t, const DenoiseSchedule& sched);

}  // namespace glcd
