// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "glcd/errors.hpp"

namespace glcd {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kComment = "# proxy metrics (desk-scale temporal statistics, not benchmark scores)";
constexpr const char* kHeader = "index,flicker,smoothness,patch_consistency";

struct Patch {
    int y0, y1, x0, x1;
};

Patch centre_patch(int H, int W) {
    const int ph = std::max(1, H / 2);
    const int pw = std::max(1, W / 2);
    const int y0 = (H - ph) / 2;
    const int x0 = (W - pw) / 2;
    return {y0, y0 + ph, x0, x0 + pw};
}

std::vector<double> patch_values(const LatentVideo& z, int k, Patch p) {
    std::vector<double> v;
    for (int c = 0; c < z.channels(); ++c)
        for (int y = p.y0; y < p.y1; ++y)
            for (int x = p.x0; x < p.x1; ++x) v.push_back(z.at(k, c, y, x));
    return v;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    const bool flat_a = saa == 0.0;
    const bool flat_b = sbb == 0.0;
    if (flat_a && flat_b) return 1.0;
    if (flat_a || flat_b) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double mean_defined(const std::vector<MetricsRow>& rows, double MetricsRow::*col) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (std::isnan(r.*col)) continue;
        sum += r.*col;
        ++n;
    }
    return n > 0 ? sum / n : kNaN;
}

std::string field(double v) {
    return std::isnan(v) ? std::string() : fmt::format("{:.9g}", v);
}

double parse_field(const std::string& s) {
    if (s.empty()) return kNaN;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) throw FormatError(fmt::format("metrics csv: bad number '{}'", s));
    return v;
}

}  // namespace

MetricsTable compute_metrics(const LatentVideo& z) {
    if (z.frames() < 1) throw ShapeError("metrics need at least one frame");
    const int K = z.frames();
    const std::size_t fs = z.shape().frame_size();
    const auto data = z.data();
    auto frame_value = [&](int k, std::size_t i) { return static_cast<double>(data[static_cast<std::size_t>(k) * fs + i]); };

    const Patch patch = centre_patch(z.height(), z.width());
    const auto ref = patch_values(z, 0, patch);

    MetricsTable table;
    for (int k = 0; k < K; ++k) {
        MetricsRow row{k, kNaN, kNaN, 0.0};
        if (k >= 1) {
            double s = 0.0;
            for (std::size_t i = 0; i < fs; ++i) s += std::abs(frame_value(k, i) - frame_value(k - 1, i));
            row.flicker = s / static_cast<double>(fs);
        }
        if (k >= 1 && k + 1 < K) {
            double s = 0.0;
            for (std::size_t i = 0; i < fs; ++i) {
                s += std::abs(frame_value(k + 1, i) - 2.0 * frame_value(k, i) + frame_value(k - 1, i));
            }
            row.smoothness = s / static_cast<double>(fs);
        }
        row.patch_consistency = correlation(patch_values(z, k, patch), ref);
        table.rows.push_back(row);
    }
    table.summary.flicker = mean_defined(table.rows, &MetricsRow::flicker);
    table.summary.smoothness = mean_defined(table.rows, &MetricsRow::smoothness);
    table.summary.patch_consistency = mean_defined(table.rows, &MetricsRow::patch_consistency);
    return table;
}

std::string metrics_csv(const MetricsTable& table) {
    std::string out = fmt::format("{}\n{}\n", kComment, kHeader);
    for (const auto& r : table.rows) {
        out += fmt::format("{},{},{},{}\n", r.index, field(r.flicker), field(r.smoothness), field(r.patch_consistency));
    }
    out += fmt::format("mean,{},{},{}\n", field(table.summary.flicker), field(table.summary.smoothness),
                       field(table.summary.patch_consistency));
    return out;
}

MetricsTable parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    bool summary_seen = false;
    MetricsTable table;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kHeader) throw FormatError(fmt::format("metrics csv: unexpected header '{}'", line));
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 4) throw FormatError(fmt::format("metrics csv: expected 4 fields in '{}'", line));
        if (cells[0] == "mean") {
            table.summary = {parse_field(cells[1]), parse_field(cells[2]), parse_field(cells[3])};
            summary_seen = true;
            continue;
        }
        MetricsRow row;
        row.index = static_cast<int>(parse_field(cells[0]));
        row.flicker = parse_field(cells[1]);
        row.smoothness = parse_field(cells[2]);
        row.patch_consistency = parse_field(cells[3]);
        table.rows.push_back(row);
    }
    if (!header_seen) throw FormatError("metrics csv: missing header");
    if (!summary_seen) throw FormatError("metrics csv: missing mean row");
    return table;
}

}  // namespace glcd
