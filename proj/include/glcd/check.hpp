// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "glcd/denoiser.hpp"
#include "glcd/fusion.hpp"
#include "glcd/noise_reinit.hpp"
#include "glcd/pipeline.hpp"
#include "glcd/schedule.hpp"
#include "glcd/vmcr.hpp"

/// Independent double-precision reference implementations and the property
/// suites built on them. Nothing here is used by the engine itself.
namespace glcd::check {

using cdouble = std::complex<double>;

/// Dense N-d DFT by direct summation over all index pairs (row-major dims).
/// The inverse is unnormalised.
std::vector<cdouble> naive_dft(const std::vector<cdouble>& x, const std::vector<int>& dims, bool inverse);

/// Stacked weighted least squares over every real clip frame of both paths,
/// solved with a column-pivoted QR on the dense system. Each clip frame
/// contributes a row with weight sqrt(path_factor * w_j).
LatentVideo dense_lsq_fuse(const PathClips& global, const PathClips& local, double gamma, int frames);

/// Frequency fusion computed bin by bin with naive_dft in double precision.
std::vector<double> spectral_split(const LatentVideo& z_T, const LatentVideo& eta, const FrequencyFilter& filter);

/// The motion loss evaluated directly from its definition in double
/// precision, with naive 2-D DFTs. z0 has shape `s`, stored row-major.
double motion_loss_f64(const std::vector<double>& z0, Shape s, const VmcrParams& p);

/// Central differences of z_t -> motion_loss_f64(predict_z0(z_t)) with eps
/// held fixed, everything in double.
std::vector<double> fd_motion_grad(const LatentVideo& z_t, const LatentVideo& eps, double alpha_bar,
                                   const VmcrParams& p, double h);

/// Plain DDIM sampling on the whole latent, one denoiser call per step.
LatentVideo plain_ddim(LatentVideo z_T, const DenoiseSchedule& sched, Denoiser& denoiser);

/// Standard DDIM update in double precision.
std::vector<double> ddim_step_f64(const LatentVideo& z, const LatentVideo& eps, double ab_from, double ab_to);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Criterion {
    int id;
    std::string name;
    std::function<CriterionResult()> run;
};

/// Property suites in a fixed order: fusion, vmcr-gradient, descent,
/// spectral, coverage, degenerate, convergence, defaults.
const std::vector<Criterion>& criteria();

/// Runs every criterion whose name contains `filter` (all when empty).
std::vector<CriterionResult> run_criteria(std::string_view filter);

std::string format_result(const CriterionResult& r);

}  // namespace glcd::check
