// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "glcd/latent.hpp"

namespace glcd {

/// Desk-scale temporal proxies for one frame. Undefined entries are NaN and
/// serialise as empty CSV fields:
///  flicker           mean |f[i] - f[i-1]|            (undefined at i = 0)
///  smoothness        mean |f[i+1] - 2 f[i] + f[i-1]|  (undefined at the ends and when K < 3)
///  patch_consistency Pearson correlation of the centre patch of f[i] with
///                    that of f[0]; 1 when both patches are constant, 0 when
///                    exactly one is.
struct MetricsRow {
    int index = 0;
    double flicker = 0.0;
    double smoothness = 0.0;
    double patch_consistency = 0.0;
};

/// Means over the defined entries of each column.
struct MetricsSummary {
    double flicker = 0.0;
    double smoothness = 0.0;
    double patch_consistency = 0.0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
    MetricsSummary summary;
};

MetricsTable compute_metrics(const LatentVideo& z0);

/// Comment line, header `index,flicker,smoothness,patch_consistency`, one
/// row per frame, then a `mean` row. Values use 9 significant digits.
std::string metrics_csv(const MetricsTable& table);
MetricsTable parse_metrics_csv(const std::string& text);

}  // namespace glcd
