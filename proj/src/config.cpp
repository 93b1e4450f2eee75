// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include "glcd/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace glcd {
namespace {

struct Field {
    const char* key;
    std::function<void(PipelineConfig&, const YAML::Node&)> read;
    std::function<std::string(const PipelineConfig&)> write;
};

std::string quoted(const std::string& s) {
    YAML::Emitter out;
    out << YAML::DoubleQuoted << s;
    return out.c_str();
}

template <class T>
T scalar(const YAML::Node& node, const char* key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("invalid value for '{}' at line {}", key, node.Mark().line + 1));
    }
}

template <class T>
Field number(const char* key, T PipelineConfig::*member) {
    return Field{key, [key, member](PipelineConfig& c, const YAML::Node& n) { c.*member = scalar<T>(n, key); },
                 [member](const PipelineConfig& c) { return fmt::format("{}", c.*member); }};
}

template <class T>
Field vmcr_number(const char* key, T VmcrParams::*member) {
    return Field{key, [key, member](PipelineConfig& c, const YAML::Node& n) { c.vmcr.*member = scalar<T>(n, key); },
                 [member](const PipelineConfig& c) { return fmt::format("{}", c.vmcr.*member); }};
}

Field text(const char* key, std::string PipelineConfig::*member) {
    return Field{key, [key, member](PipelineConfig& c, const YAML::Node& n) { c.*member = scalar<std::string>(n, key); },
                 [member](const PipelineConfig& c) { return quoted(c.*member); }};
}

WeightKind parse_weight_kind(const std::string& s, const char* key) {
    if (s == "uniform") return WeightKind::Uniform;
    if (s == "triangular") return WeightKind::Triangular;
    throw ConfigError(fmt::format("invalid value for '{}': expected uniform|triangular, got '{}'", key, s));
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        number("frames", &PipelineConfig::frames),
        number("channels", &PipelineConfig::channels),
        number("height", &PipelineConfig::height),
        number("width", &PipelineConfig::width),
        number("clip_length", &PipelineConfig::clip_length),
        number("dilation", &PipelineConfig::dilation),
        number("stride", &PipelineConfig::stride),
        number("max_padded_frames", &PipelineConfig::max_padded_frames),
        number("steps", &PipelineConfig::steps),
        number("train_steps", &PipelineConfig::train_steps),
        number("beta_start", &PipelineConfig::beta_start),
        number("beta_end", &PipelineConfig::beta_end),
        number("seed", &PipelineConfig::seed),
        number("enable_global", &PipelineConfig::enable_global),
        number("enable_local", &PipelineConfig::enable_local),
        number("gamma0", &PipelineConfig::gamma0),
        number("beta_anneal", &PipelineConfig::beta_anneal),
        Field{"gamma_override",
              [](PipelineConfig& c, const YAML::Node& n) {
                  if (n.IsNull()) {
                      c.gamma_override.reset();
                  } else {
                      c.gamma_override = scalar<double>(n, "gamma_override");
                  }
              },
              [](const PipelineConfig& c) {
                  return c.gamma_override ? fmt::format("{}", *c.gamma_override) : std::string("null");
              }},
        Field{"weight_profile",
              [](PipelineConfig& c, const YAML::Node& n) {
                  c.weight_profile = parse_weight_kind(scalar<std::string>(n, "weight_profile"), "weight_profile");
              },
              [](const PipelineConfig& c) {
                  return std::string(c.weight_profile == WeightKind::Uniform ? "uniform" : "triangular");
              }},
        number("per_clip_shift", &PipelineConfig::per_clip_shift),
        number("enable_abam", &PipelineConfig::enable_abam),
        number("abam_on_global", &PipelineConfig::abam_on_global),
        number("lambda", &PipelineConfig::lambda_anchor),
        number("enable_shuffle", &PipelineConfig::enable_shuffle),
        number("shuffle_window", &PipelineConfig::shuffle_window),
        number("enable_freq_filter", &PipelineConfig::enable_freq_filter),
        Field{"filter",
              [](PipelineConfig& c, const YAML::Node& n) {
                  try {
                      c.filter_kind = parse_filter_kind(scalar<std::string>(n, "filter"));
                  } catch (const ParameterError& e) {
                      throw ConfigError(fmt::format("invalid value for 'filter': {}", e.what()));
                  }
              },
              [](const PipelineConfig& c) { return std::string(to_string(c.filter_kind)); }},
        number("filter_cutoff", &PipelineConfig::filter_cutoff),
        number("enable_vmcr", &PipelineConfig::enable_vmcr),
        vmcr_number("lambda_f", &VmcrParams::lambda_f),
        vmcr_number("lambda_mse", &VmcrParams::lambda_mse),
        vmcr_number("lambda_phase", &VmcrParams::lambda_phase),
        vmcr_number("omega_motion", &VmcrParams::omega_motion),
        vmcr_number("vmcr_iters", &VmcrParams::n_iters),
        vmcr_number("eps_guard", &VmcrParams::eps_guard),
        vmcr_number("wrap_phase", &VmcrParams::wrap_phase),
        text("denoiser", &PipelineConfig::denoiser),
        number("denoiser_mu", &PipelineConfig::denoiser_mu),
        number("denoiser_sigma", &PipelineConfig::denoiser_sigma),
        number("noise_scale", &PipelineConfig::noise_scale),
        number("attention_dim", &PipelineConfig::attention_dim),
        text("conditioning", &PipelineConfig::conditioning),
        text("bridge_endpoint", &PipelineConfig::bridge_endpoint),
        number("threads", &PipelineConfig::threads),
    };
    return table;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.emplace_back(f.key);
    return keys;
}

PipelineConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("parse error at line {}: {}", e.mark.line + 1, e.msg));
    }
    PipelineConfig cfg;
    if (root.IsNull()) {
        cfg.validate();
        return cfg;
    }
    if (!root.IsMap()) {
        throw ConfigError(fmt::format("config must be a key-value mapping (line {})", root.Mark().line + 1));
    }
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
        if (it == fields().end()) {
            throw ConfigError(fmt::format("unknown key '{}' at line {}", key, kv.first.Mark().line + 1));
        }
        if (!kv.second.IsScalar() && !kv.second.IsNull()) {
            throw ConfigError(fmt::format("invalid value for '{}' at line {}: expected a scalar", key,
                                          kv.second.Mark().line + 1));
        }
        it->read(cfg, kv.second);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const PipelineConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += fmt::format("{}: {}\n", f.key, f.write(cfg));
    return out;
}

void save_config(const std::string& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(fmt::format("cannot write config '{}'", path));
    out << dump_config(cfg);
    if (!out) throw ConfigError(fmt::format("short write to '{}'", path));
}

}  // namespace glcd
