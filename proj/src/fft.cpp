// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "glcd/errors.hpp"

namespace glcd::fft {

namespace {

static_assert(sizeof(cfloat) == sizeof(fftwf_complex));

struct PlanDeleter {
    void operator()(fftwf_plan_s* p) const { fftwf_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftwf_plan_s, PlanDeleter>;

using PlanKey = std::tuple<int, int, int, int, int>;  // rank, n0, n1, n2, sign

// FFTW planning is not thread safe, execution of a finished plan is.
class PlanCache {
public:
    fftwf_plan get(std::span<const int> dims, int sign) {
        const int rank = static_cast<int>(dims.size());
        PlanKey key{rank, dims[0], rank > 1 ? dims[1] : 1, rank > 2 ? dims[2] : 1, sign};
        std::lock_guard lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second.get();

        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        auto* scratch = fftwf_alloc_complex(n);
        fftwf_plan plan = fftwf_plan_dft(rank, dims.data(), scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftwf_free(scratch);
        if (plan == nullptr) throw NumericError("FFTW failed to create a plan");
        return plans_.emplace(key, PlanPtr(plan)).first->second.get();
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, PlanPtr> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

std::size_t volume(std::span<const int> dims) {
    std::size_t n = 1;
    for (int d : dims) {
        if (d < 1) throw ShapeError("FFT extents must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

void transform(std::span<cfloat> data, std::span<const int> dims, Direction dir) {
    if (dims.empty() || dims.size() > 3) throw ShapeError("FFT rank must be 1, 2 or 3");
    if (data.size() != volume(dims)) throw ShapeError("FFT buffer does not match extents");
    fftwf_plan plan = cache().get(dims, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* buf = reinterpret_cast<fftwf_complex*>(data.data());
    fftwf_execute_dft(plan, buf, buf);
}

std::vector<cfloat> forward3d(std::span<const float> real, int d0, int d1, int d2) {
    std::vector<cfloat> buf(real.begin(), real.end());
    const int dims[3] = {d0, d1, d2};
    transform(buf, dims, Direction::Forward);
    return buf;
}

std::vector<float> inverse3d_real(std::vector<cfloat> spectrum, int d0, int d1, int d2, float& max_imag) {
    const int dims[3] = {d0, d1, d2};
    transform(spectrum, dims, Direction::Inverse);
    const float scale = 1.0f / static_cast<float>(spectrum.size());
    std::vector<float> out(spectrum.size());
    max_imag = 0.0f;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out[i] = spectrum[i].real() * scale;
        max_imag = std::max(max_imag, std::abs(spectrum[i].imag() * scale));
    }
    return out;
}

std::vector<cfloat> forward2d(std::span<const float> real, int rows, int cols) {
    std::vector<cfloat> buf(real.begin(), real.end());
    const int dims[2] = {rows, cols};
    transform(buf, dims, Direction::Forward);
    return buf;
}

std::vector<float> adjoint2d_real(std::vector<cfloat> spectrum, int rows, int cols) {
    const int dims[2] = {rows, cols};
    transform(spectrum, dims, Direction::Inverse);
    std::vector<float> out(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i].real();
    return out;
}

}  // namespace glcd::fft
