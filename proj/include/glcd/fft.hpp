// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace glcd::fft {

using cfloat = std::complex<float>;

enum class Direction { Forward, Inverse };

/// In-place unnormalised complex DFT over a row-major array of the given
/// extents (rank 1 to 3). Forward uses exp(-2*pi*i*k*n/N); Inverse uses the
/// conjugate kernel without the 1/N factor.
void transform(std::span<cfloat> data, std::span<const int> dims, Direction dir);

/// Forward 3-D transform of real data.
std::vector<cfloat> forward3d(std::span<const float> real, int d0, int d1, int d2);
/// Normalised inverse 3-D transform; returns the real part and stores the
/// largest absolute imaginary component in `max_imag`.
std::vector<float> inverse3d_real(std::vector<cfloat> spectrum, int d0, int d1, int d2, float& max_imag);

/// Forward 2-D transform of real data.
std::vector<cfloat> forward2d(std::span<const float> real, int rows, int cols);
/// Unnormalised inverse 2-D transform, real part only (the adjoint of
/// forward2d restricted to real inputs).
std::vector<float> adjoint2d_real(std::vector<cfloat> spectrum, int rows, int cols);

}  // namespace glcd::fft
