// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

// glcd command-line front end.
//
//   glcd generate --config PATH --out DIR [--seed N]
//   glcd inspect  --config PATH
//   glcd check    [--filter NAME]
//   glcd export   --latent PATH --out DIR [--normalize minmax|clamp]
//   glcd metrics  --latent PATH --out CSV
//
// GLCD_LOG=quiet|info|debug sets stderr verbosity (default info).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glcd/check.hpp"
#include "glcd/config.hpp"
#include "glcd/io.hpp"
#include "glcd/metrics.hpp"
#include "glcd/pipeline.hpp"

namespace fs = std::filesystem;
using namespace glcd;

namespace {

enum class Level { Quiet, Info, Debug };

Level log_level() {
    const char* env = std::getenv("GLCD_LOG");
    const std::string v = env != nullptr ? env : "";
    if (v == "quiet") return Level::Quiet;
    if (v == "debug") return Level::Debug;
    return Level::Info;
}

template <typename... Args>
void log(Level at, fmt::format_string<Args...> f, Args&&... args) {
    if (log_level() >= at) fmt::print(stderr, "glcd: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

int run_generate(const std::string& config_path, const fs::path& out, std::optional<std::uint64_t> seed) {
    PipelineConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    log(Level::Info, "resolved config:\n{}", dump_config(cfg));

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw IoError(fmt::format("cannot create output directory '{}'", out.string()));

    const auto sched = make_schedule(cfg);
    auto denoiser = make_denoiser(cfg, sched);
    Pipeline pipeline(cfg, *denoiser);
    RunResult result;
    try {
        result = pipeline.run();
    } catch (const PipelineError& e) {
        write_file(out / "report.csv", reports_csv(e.partial_reports()));
        throw;
    }
    for (const auto& r : result.reports) {
        log(Level::Debug, "step {} t={} -> {} gamma={:.6g} res_g={:.6g} res_l={:.6g} {:.1f} ms", r.step, r.t, r.t_next,
            r.gamma, r.residual_global, r.residual_local, r.wall_ms);
    }

    save_config((out / "config.yaml").string(), cfg);
    save_latent(out / "z0.npy", result.z0);
    write_file(out / "metrics.csv", metrics_csv(compute_metrics(result.z0)));
    write_file(out / "report.csv", reports_csv(result.reports));
    std::string timings = "step,wall_ms\n";
    for (const auto& r : result.reports) timings += fmt::format("{},{:.3f}\n", r.step, r.wall_ms);
    write_file(out / "timings.csv", timings);
    log(Level::Info, "wrote {} ({} steps, denoiser {})", out.string(), result.reports.size(), denoiser->name());
    return 0;
}

nlohmann::json map_json(const ClipMap& m) {
    return {{"clip_id", m.clip_id}, {"indices", m.indices}, {"right_pad", m.pad.right}};
}

int run_inspect(const std::string& config_path) {
    const PipelineConfig cfg = load_config(config_path);
    ZeroDenoiser placeholder;
    const Pipeline p(cfg, placeholder);

    nlohmann::json doc;
    doc["latent_shape"] = {cfg.frames, cfg.channels, cfg.height, cfg.width};
    doc["clip_length"] = cfg.clip_length;
    doc["dilation"] = cfg.resolved_dilation();
    doc["stride"] = cfg.resolved_stride();

    nlohmann::json global = nlohmann::json::array();
    if (cfg.enable_global)
        for (const auto& m : p.global_maps()) global.push_back(map_json(m));
    doc["global_clips"] = global.size();
    doc["global_maps"] = global;

    nlohmann::json steps = nlohmann::json::array();
    const auto& ts = p.schedule().timesteps();
    for (int s = 0; s < p.schedule().num_steps(); ++s) {
        nlohmann::json row = {{"step", s}, {"t", ts[static_cast<std::size_t>(s)]}, {"t_next", p.schedule().target(s)},
                              {"gamma", p.gamma_at(ts[static_cast<std::size_t>(s)])}};
        if (cfg.enable_local) {
            const auto maps = p.local_maps(s);
            nlohmann::json starts = nlohmann::json::array();
            for (const auto& m : maps) starts.push_back(m.indices.front());
            row["shift"] = maps.front().shift;
            row["local_starts"] = starts;
        }
        steps.push_back(row);
    }
    doc["steps"] = steps;

    nlohmann::json filter = {{"enabled", cfg.enable_freq_filter},
                             {"kind", std::string(to_string(cfg.filter_kind))},
                             {"cutoff", cfg.filter_cutoff}};
    if (cfg.enable_freq_filter) {
        const FrequencyFilter f = make_lpf(cfg.frames, cfg.height, cfg.width, cfg.filter_kind, cfg.filter_cutoff);
        std::vector<float> temporal;
        for (int k = 0; k < cfg.frames; ++k) temporal.push_back(f.at(k, 0, 0));
        filter["temporal_profile"] = temporal;
        filter["conjugate_symmetric"] = f.conjugate_symmetric();
    }
    doc["filter"] = filter;
    fmt::print("{}\n", doc.dump(2));
    return 0;
}

int run_check(const std::string& filter) {
    const auto results = check::run_criteria(filter);
    if (results.empty()) throw ParameterError(fmt::format("no criterion matches '{}'", filter));
    int failed = 0;
    for (const auto& r : results) {
        fmt::print("{}\n", check::format_result(r));
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria failed\n", failed, results.size());
    return failed == 0 ? 0 : 1;
}

int run_export(const fs::path& latent, const fs::path& out, const std::string& normalize) {
    const auto files = export_frames(load_latent(latent), out, parse_normalize(normalize));
    log(Level::Info, "wrote {} frames to {}", files.size(), out.string());
    return 0;
}

int run_metrics(const fs::path& latent, const fs::path& out) {
    write_file(out, metrics_csv(compute_metrics(load_latent(latent))));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"glcd: long-video denoising orchestration over short-clip denoisers"};
    app.require_subcommand(1);

    std::string config_path, latent_path, out_path, filter, normalize = "minmax";
    std::optional<std::uint64_t> seed;

    auto* gen = app.add_subcommand("generate", "run the sampler and write z0.npy, metrics.csv, report.csv");
    gen->add_option("--config", config_path, "YAML config file")->required();
    gen->add_option("--out", out_path, "output directory")->required();
    gen->add_option("--seed", seed, "override the config seed");

    auto* ins = app.add_subcommand("inspect", "print clip maps, gamma schedule and filter as JSON");
    ins->add_option("--config", config_path, "YAML config file")->required();

    auto* chk = app.add_subcommand("check", "run the oracle and invariant suites");
    chk->add_option("--filter", filter, "substring of criterion names");

    auto* exp = app.add_subcommand("export", "write one PPM per frame");
    exp->add_option("--latent", latent_path, "NPY latent")->required();
    exp->add_option("--out", out_path, "output directory")->required();
    exp->add_option("--normalize", normalize, "minmax or clamp")->check(CLI::IsMember({"minmax", "clamp"}));

    auto* met = app.add_subcommand("metrics", "write proxy temporal metrics as CSV");
    met->add_option("--latent", latent_path, "NPY latent")->required();
    met->add_option("--out", out_path, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::fputs(app.help().c_str(), stderr);
        return 2;
    }

    try {
        if (*gen) return run_generate(config_path, out_path, seed);
        if (*ins) return run_inspect(config_path);
        if (*chk) return run_check(filter);
        if (*exp) return run_export(latent_path, out_path, normalize);
        if (*met) return run_metrics(latent_path, out_path);
    } catch (const PipelineError& e) {
        fmt::print(stderr, "error: pipeline: {} ({} steps completed)\n", e.what(), e.partial_reports().size());
        return 1;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: config: {}\n", e.what());
        return 1;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: internal: {}\n", e.what());
        return 1;
    }
    return 2;
}
