// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/schedule.hpp"

#include <cmath>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {

DenoiseSchedule::DenoiseSchedule(std::vector<double> alpha_bar, std::vector<int> timesteps)
    : alpha_bar_(std::move(alpha_bar)), timesteps_(std::move(timesteps)) {
    if (alpha_bar_.size() < 2 || alpha_bar_.front() != 1.0) {
        throw ScheduleError("alpha_bar table must start at alpha_bar(0) = 1 and have T >= 1");
    }
    for (std::size_t t = 1; t < alpha_bar_.size(); ++t) {
        if (!(alpha_bar_[t] > 0.0) || !(alpha_bar_[t] < alpha_bar_[t - 1])) {
            throw ScheduleError(fmt::format("alpha_bar must be strictly decreasing in (0, 1]; violated at t={}", t));
        }
    }
    if (timesteps_.empty()) throw ScheduleError("schedule visits no timesteps");
    for (std::size_t i = 0; i < timesteps_.size(); ++i) {
        if (timesteps_[i] < 1 || timesteps_[i] > train_steps()) {
            throw ScheduleError(fmt::format("timestep {} outside [1, {}]", timesteps_[i], train_steps()));
        }
        if (i > 0 && timesteps_[i] >= timesteps_[i - 1]) {
            throw ScheduleError("visited timesteps must be strictly decreasing");
        }
    }
}

double DenoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > train_steps()) {
        throw ScheduleError(fmt::format("timestep {} outside schedule [0, {}]", t, train_steps()));
    }
    return alpha_bar_[static_cast<std::size_t>(t)];
}

int DenoiseSchedule::target(int step) const {
    if (step < 0 || step >= num_steps()) throw ScheduleError(fmt::format("step index {} out of range", step));
    return step + 1 < num_steps() ? timesteps_[static_cast<std::size_t>(step) + 1] : 0;
}

DenoiseSchedule DenoiseSchedule::strided(int num_steps) const {
    const int T = train_steps();
    if (num_steps < 1 || num_steps > T) {
        throw ScheduleError(fmt::format("cannot visit {} steps of a {}-step table", num_steps, T));
    }
    std::vector<int> ts;
    ts.reserve(static_cast<std::size_t>(num_steps));
    for (int i = num_steps; i >= 1; --i) {
        ts.push_back(static_cast<int>(static_cast<long long>(i) * T / num_steps));
    }
    return DenoiseSchedule(alpha_bar_, std::move(ts));
}

DenoiseSchedule alpha_schedule(int train_steps, double beta_start, double beta_end) {
    if (train_steps < 1) throw ParameterError("schedule needs at least one timestep");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        throw ParameterError(fmt::format("invalid beta range [{}, {}]: need 0 < start <= end < 1", beta_start, beta_end));
    }
    std::vector<double> alpha_bar(static_cast<std::size_t>(train_steps) + 1);
    alpha_bar[0] = 1.0;
    for (int i = 1; i <= train_steps; ++i) {
        const double frac = train_steps == 1 ? 0.0 : static_cast<double>(i - 1) / (train_steps - 1);
        const double beta = beta_start + (beta_end - beta_start) * frac;
        alpha_bar[static_cast<std::size_t>(i)] = alpha_bar[static_cast<std::size_t>(i) - 1] * (1.0 - beta);
    }
    std::vector<int> ts;
    for (int t = train_steps; t >= 1; --t) ts.push_back(t);
    return DenoiseSchedule(std::move(alpha_bar), std::move(ts));
}

LatentVideo ddim_step(const LatentVideo& z_t, const DenoisePrediction& pred, int t_from, int t_to,
                      const DenoiseSchedule& sched) {
    require_same_shape(z_t, pred.eps, "ddim_step");
    if (t_to > t_from) throw ScheduleError(fmt::format("ddim_step must move backwards, got {} -> {}", t_from, t_to));
    require_finite(z_t, "ddim_step latent");
    require_finite(pred.eps, "ddim_step prediction");

    const double a_from = sched.alpha_bar(t_from);
    const double a_to = sched.alpha_bar(t_to);
    const auto c_z = static_cast<float>(std::sqrt(a_to / a_from));
    const auto c_eps =
        static_cast<float>(std::sqrt(a_to) * (std::sqrt(1.0 / a_to - 1.0) - std::sqrt(1.0 / a_from - 1.0)));

    LatentVideo out(z_t.shape());
    auto dst = out.data();
    auto z = z_t.data();
    auto e = pred.eps.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = c_z * z[i] + c_eps * e[i];
    return out;
}

LatentVideo predict_z0(const LatentVideo& z_t, const DenoisePrediction& pred, int t, const DenoiseSchedule& sched) {
    require_same_shape(z_t, pred.eps, "predict_z0");
    const double a = sched.alpha_bar(t);
    if (!(a > 0.0)) throw ScheduleError(fmt::format("alpha_bar({}) = {} is not positive", t, a));
    const auto c_eps = static_cast<float>(std::sqrt(1.0 - a));
    const auto inv = static_cast<float>(1.0 / std::sqrt(a));

    LatentVideo out(z_t.shape());
    auto dst = out.data();
    auto z = z_t.data();
    auto e = pred.eps.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (z[i] - c_eps * e[i]) * inv;
    return out;
}

LatentVideo renoise(const LatentVideo& z0, const LatentVideo& eps, int t, const DenoiseSchedule& sched) {
    require_same_shape(z0, eps, "renoise");
    const double a = sched.alpha_bar(t);
    const auto c0 = static_cast<float>(std::sqrt(a));
    const auto ce = static_cast<float>(std::sqrt(1.0 - a));
    LatentVideo out(z0.shape());
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = c0 * z0.data()[i] + ce * eps.data()[i];
    return out;
}

}  // namespace glcd
