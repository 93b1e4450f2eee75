// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "glcd/pipeline.hpp"

namespace glcd {

/// Parses a flat YAML mapping of config keys. Missing keys keep their
/// defaults, an empty document yields the defaults, unknown keys and
/// invalid values raise ConfigError.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);

/// Every key with its resolved value, one `key: value` line each, in a
/// stable order. parse_config(dump_config(c)) == c.
std::string dump_config(const PipelineConfig& cfg);
void save_config(const std::string& path, const PipelineConfig& cfg);

/// Recognised keys in dump order.
std::vector<std::string> config_keys();

}  // namespace glcd
