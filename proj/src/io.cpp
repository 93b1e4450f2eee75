// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "glcd/errors.hpp"

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace glcd {
namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string shape_tuple(std::span<const std::int64_t> shape) {
    if (shape.size() == 1) return fmt::format("({},)", shape[0]);
    return fmt::format("({})", fmt::join(shape, ", "));
}

std::uint64_t element_count(std::span<const std::int64_t> shape) {
    std::uint64_t n = 1;
    for (auto d : shape) {
        if (d < 0) throw FormatError("npy: negative dimension");
        if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(d)) {
            throw FormatError("npy: element count overflows");
        }
        n *= static_cast<std::uint64_t>(d);
    }
    return n;
}

std::uint32_t read_le(std::string_view b, std::size_t at, std::size_t width) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
    return v;
}

}  // namespace

std::string encode_npy(std::span<const std::int64_t> shape, std::span<const float> data) {
    if (element_count(shape) != data.size()) throw ShapeError("npy: data size does not match shape");
    std::string dict = fmt::format("{{'descr': '<f4', 'fortran_order': False, 'shape': {}, }}", shape_tuple(shape));
    const std::size_t unpadded = kMagicLen + 2 + 2 + dict.size() + 1;
    const std::size_t total = (unpadded + 63) / 64 * 64;
    dict.append(total - unpadded, ' ');
    dict += '\n';
    if (dict.size() > 0xffff) throw FormatError("npy: header too long for format 1.0");

    std::string out(kMagic, kMagicLen);
    out += '\x01';
    out += '\x00';
    out += static_cast<char>(dict.size() & 0xff);
    out += static_cast<char>((dict.size() >> 8) & 0xff);
    out += dict;
    const std::size_t at = out.size();
    out.resize(at + data.size_bytes());
    if (!data.empty()) std::memcpy(out.data() + at, data.data(), data.size_bytes());
    return out;
}

NpyArray decode_npy(std::string_view b) {
    if (b.size() < kMagicLen + 2 || b.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen)) {
        throw FormatError("npy: bad magic");
    }
    const int major = static_cast<unsigned char>(b[6]);
    std::size_t header_len = 0;
    std::size_t header_at = 0;
    if (major == 1) {
        if (b.size() < 10) throw FormatError("npy: truncated header");
        header_len = read_le(b, 8, 2);
        header_at = 10;
    } else if (major == 2 || major == 3) {
        if (b.size() < 12) throw FormatError("npy: truncated header");
        header_len = read_le(b, 8, 4);
        header_at = 12;
    } else {
        throw FormatError(fmt::format("npy: unsupported format version {}.{}", major,
                                      static_cast<unsigned char>(b[7])));
    }
    if (b.size() < header_at + header_len) throw FormatError("npy: truncated header");
    const std::string header(b.substr(header_at, header_len));

    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;
    if (!std::regex_search(header, m, descr_re)) throw FormatError("npy: header lacks 'descr'");
    const std::string descr = m[1];
    if (descr == ">f4") throw FormatError("npy: big-endian float32 ('>f4') is not supported; expected '<f4'");
    if (descr != "<f4") throw FormatError(fmt::format("npy: dtype '{}' is not supported; expected '<f4'", descr));
    if (!std::regex_search(header, m, order_re)) throw FormatError("npy: header lacks 'fortran_order'");
    if (m[1] == "True") throw FormatError("npy: Fortran-ordered arrays are not supported");
    if (!std::regex_search(header, m, shape_re)) throw FormatError("npy: header lacks 'shape'");

    NpyArray arr;
    std::stringstream dims(m[1]);
    std::string item;
    while (std::getline(dims, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        if (item.find_first_not_of("0123456789") != std::string::npos) {
            throw FormatError(fmt::format("npy: bad shape entry '{}'", item));
        }
        arr.shape.push_back(std::stoll(item));
    }
    const std::uint64_t n = element_count(arr.shape);
    const std::size_t data_at = header_at + header_len;
    if (n > (b.size() - data_at) / sizeof(float)) {
        throw FormatError(fmt::format("npy: truncated data ({} bytes for {} elements)", b.size() - data_at, n));
    }
    if (b.size() - data_at != n * sizeof(float)) throw FormatError("npy: trailing bytes after data");
    arr.data.resize(n);
    if (n > 0) std::memcpy(arr.data.data(), b.data() + data_at, n * sizeof(float));
    return arr;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError(fmt::format("short write to '{}'", path.string()));
}

void write_npy(const std::filesystem::path& path, std::span<const std::int64_t> shape, std::span<const float> data) {
    write_file(path, encode_npy(shape, data));
}

NpyArray read_npy(const std::filesystem::path& path) {
    return decode_npy(read_file(path));
}

void save_latent(const std::filesystem::path& path, const LatentVideo& z) {
    const Shape s = z.shape();
    const std::int64_t dims[4] = {s.frames, s.channels, s.height, s.width};
    write_npy(path, dims, z.data());
}

LatentVideo load_latent(const std::filesystem::path& path) {
    NpyArray arr = read_npy(path);
    if (arr.shape.size() != 4) {
        throw FormatError(fmt::format("npy: latent must have 4 dimensions (K, C, H, W), got {}", arr.shape.size()));
    }
    for (auto d : arr.shape) {
        if (d < 1 || d > std::numeric_limits<int>::max()) throw FormatError("npy: latent dimensions must be positive");
    }
    const Shape s{static_cast<int>(arr.shape[0]), static_cast<int>(arr.shape[1]), static_cast<int>(arr.shape[2]),
                  static_cast<int>(arr.shape[3])};
    return LatentVideo(s, std::move(arr.data));
}

Normalize parse_normalize(std::string_view name) {
    if (name == "minmax") return Normalize::MinMax;
    if (name == "clamp") return Normalize::Clamp;
    throw ParameterError(fmt::format("unknown normalisation '{}' (minmax|clamp)", name));
}

std::uint8_t to_byte(double v) {
    const long q = std::lround((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}

namespace {

struct Range {
    double lo, hi;
};

Range used_range(const LatentVideo& z) {
    const int used = std::min(z.channels(), 3);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int k = 0; k < z.frames(); ++k)
        for (int c = 0; c < used; ++c)
            for (int y = 0; y < z.height(); ++y)
                for (int x = 0; x < z.width(); ++x) {
                    const double v = z.at(k, c, y, x);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
    return {lo, hi};
}

std::string ppm_bytes(const LatentVideo& z, int k, Normalize mode, Range r) {
    const int H = z.height();
    const int W = z.width();
    std::string out = fmt::format("P6\n{} {}\n255\n", W, H);
    const std::size_t at = out.size();
    out.resize(at + static_cast<std::size_t>(H) * W * 3);
    const bool degenerate = !(r.hi > r.lo);
    auto norm = [&](double v) {
        if (mode == Normalize::Clamp) return v;
        if (degenerate) return 0.0;
        return 2.0 * (v - r.lo) / (r.hi - r.lo) - 1.0;
    };
    std::size_t o = at;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) {
                const int src = z.channels() >= 3 ? c : 0;
                out[o++] = static_cast<char>(to_byte(norm(z.at(k, src, y, x))));
            }
    return out;
}

}  // namespace

std::string encode_ppm(const LatentVideo& z, int k, Normalize mode) {
    if (k < 0 || k >= z.frames()) throw ParameterError(fmt::format("frame {} out of range", k));
    return ppm_bytes(z, k, mode, used_range(z));
}

std::vector<std::filesystem::path> export_frames(const LatentVideo& z, const std::filesystem::path& dir,
                                                 Normalize mode) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
    }
    const Range r = used_range(z);
    std::vector<std::filesystem::path> files;
    for (int k = 0; k < z.frames(); ++k) {
        files.push_back(dir / fmt::format("frame_{:05d}.ppm", k));
        write_file(files.back(), ppm_bytes(z, k, mode, r));
    }
    return files;
}

}  // namespace glcd
