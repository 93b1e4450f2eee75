// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glcd/latent.hpp"

namespace glcd {

/// A little-endian float32 C-order array as stored in an NPY file.
struct NpyArray {
    std::vector<std::int64_t> shape;
    std::vector<float> data;
};

std::string encode_npy(std::span<const std::int64_t> shape, std::span<const float> data);
NpyArray decode_npy(std::string_view bytes);

void write_npy(const std::filesystem::path& path, std::span<const std::int64_t> shape, std::span<const float> data);
NpyArray read_npy(const std::filesystem::path& path);

/// Latents are stored with shape (K, C, H, W).
void save_latent(const std::filesystem::path& path, const LatentVideo& z);
LatentVideo load_latent(const std::filesystem::path& path);

enum class Normalize { MinMax, Clamp };
Normalize parse_normalize(std::string_view name);

/// Quantises one normalised value in [-1, 1] to a byte: lround((v + 1) * 127.5).
std::uint8_t to_byte(double v);

/// P6 image bytes for frame k. Channels 0..2 become RGB when C >= 3,
/// otherwise channel 0 is replicated as grey. MinMax maps the video-wide
/// [min, max] of the used channels onto [-1, 1] (a constant video maps to 0,
/// i.e. byte 128); Clamp clips values into [-1, 1].
std::string encode_ppm(const LatentVideo& z, int k, Normalize mode);

/// Writes frame_%05d.ppm for every frame, creating dir if needed.
std::vector<std::filesystem::path> export_frames(const LatentVideo& z, const std::filesystem::path& dir,
                                                 Normalize mode);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace glcd
