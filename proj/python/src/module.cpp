// Copyright (C) 2026 The glcd authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "glcd/check.hpp"
#include "glcd/clip_maps.hpp"
#include "glcd/config.hpp"
#include "glcd/fusion.hpp"
#include "glcd/io.hpp"
#include "glcd/metrics.hpp"
#include "glcd/noise_reinit.hpp"
#include "glcd/pipeline.hpp"

namespace py = pybind11;
using namespace glcd;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_numpy(const LatentVideo& z) {
    const Shape s = z.shape();
    FloatArray out({s.frames, s.channels, s.height, s.width});
    if (z.size() > 0) std::memcpy(out.mutable_data(), z.data().data(), z.data().size_bytes());
    return out;
}

LatentVideo from_numpy(const FloatArray& a) {
    if (a.ndim() != 4) throw ShapeError("expected a (K, C, H, W) array");
    const Shape s{static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)),
                  static_cast<int>(a.shape(3))};
    return LatentVideo(s, std::vector<float>(a.data(), a.data() + a.size()));
}

py::list maps_to_list(const std::vector<ClipMap>& maps) {
    py::list out;
    for (const auto& m : maps) out.append(py::cast(m.indices));
    return out;
}

py::dict report_dict(const StepReport& r) {
    py::dict d;
    d["step"] = r.step;
    d["t"] = r.t;
    d["t_next"] = r.t_next;
    d["gamma"] = r.gamma;
    d["residual_global"] = r.residual_global;
    d["residual_local"] = r.residual_local;
    d["global_clips"] = r.global_clips;
    d["local_clips"] = r.local_clips;
    d["shift"] = r.shift;
    if (r.vmcr) {
        d["loss_total"] = r.vmcr->total;
        d["loss_pixel"] = r.vmcr->pixel;
        d["loss_freq"] = r.vmcr->freq;
        d["grad_norm"] = r.vmcr->grad_norm;
    } else {
        d["loss_total"] = py::none();
    }
    return d;
}

py::dict run_config(const std::string& yaml) {
    const PipelineConfig cfg = parse_config(yaml);
    RunResult result;
    {
        py::gil_scoped_release release;
        auto denoiser = make_denoiser(cfg, make_schedule(cfg));
        result = Pipeline(cfg, *denoiser).run();
    }
    py::list reports;
    for (const auto& r : result.reports) reports.append(report_dict(r));
    py::dict out;
    out["z0"] = to_numpy(result.z0);
    out["z_init"] = to_numpy(result.z_init);
    out["reports"] = reports;
    out["report_csv"] = reports_csv(result.reports);
    out["seed"] = result.seed;
    return out;
}

}  // namespace

PYBIND11_MODULE(_glcd, m) {
    m.doc() = "Bindings for the glcd long-video denoising engine";

    auto& base = py::register_exception<Error>(m, "GlcdError");
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<FormatError>(m, "FormatError", base);

    m.def("default_config", [] { return dump_config(PipelineConfig{}); }, "Default configuration as YAML text.");
    m.def("normalize_config", [](const std::string& yaml) { return dump_config(parse_config(yaml)); },
          py::arg("yaml"), "Parses, validates and re-emits a configuration.");
    m.def("config_keys", &config_keys);
    m.def("run", &run_config, py::arg("yaml") = std::string(),
          "Runs the sampler; returns z0, z_init, per-step reports and the report CSV.");

    m.def("global_maps",
          [](int frames, int length, int dilation) { return maps_to_list(make_global_maps(frames, length, dilation)); },
          py::arg("frames"), py::arg("length"), py::arg("dilation"));
    m.def("local_maps",
          [](int frames, int length, int stride, int t, std::uint64_t seed, bool per_clip) {
              return maps_to_list(make_local_maps(frames, length, stride, t, ShiftPlan{seed, per_clip}));
          },
          py::arg("frames"), py::arg("length"), py::arg("stride"), py::arg("t"), py::arg("seed") = 0,
          py::arg("per_clip") = false);
    m.def("annealing_gamma", [](int t, double gamma0, double beta) { return annealing_gamma(t, {gamma0, beta}); },
          py::arg("t"), py::arg("gamma0") = 0.005, py::arg("beta") = 0.0005);
    m.def("glcd_fuse",
          [](const FloatArray& g, const FloatArray& l, double gamma) {
              return to_numpy(glcd_fuse(from_numpy(g), from_numpy(l), gamma).latent);
          },
          py::arg("global_"), py::arg("local"), py::arg("gamma"));
    m.def("lowpass_mask",
          [](int frames, int height, int width, const std::string& kind, double cutoff) {
              const FrequencyFilter f = make_lpf(frames, height, width, parse_filter_kind(kind), cutoff);
              FloatArray out({frames, height, width});
              std::memcpy(out.mutable_data(), f.mask().data(), f.mask().size() * sizeof(float));
              return out;
          },
          py::arg("frames"), py::arg("height"), py::arg("width"), py::arg("kind") = "gaussian",
          py::arg("cutoff") = 0.25);

    m.def("save_latent", [](const std::string& path, const FloatArray& z) { save_latent(path, from_numpy(z)); });
    m.def("load_latent", [](const std::string& path) { return to_numpy(load_latent(path)); });
    m.def("metrics_csv", [](const FloatArray& z) { return metrics_csv(compute_metrics(from_numpy(z))); });
    m.def("export_frames",
          [](const FloatArray& z, const std::string& dir, const std::string& normalize) {
              std::vector<std::string> names;
              for (const auto& p : export_frames(from_numpy(z), dir, parse_normalize(normalize))) names.push_back(p.string());
              return names;
          },
          py::arg("z"), py::arg("dir"), py::arg("normalize") = "minmax");

    m.def("run_criteria",
          [](const std::string& filter) {
              py::list out;
              std::vector<check::CriterionResult> results;
              {
                  py::gil_scoped_release release;
                  results = check::run_criteria(filter);
              }
              for (const auto& r : results) {
                  py::dict d;
                  d["id"] = r.id;
                  d["name"] = r.name;
                  d["passed"] = r.pass;
                  d["detail"] = r.detail;
                  out.append(d);
              }
              return out;
          },
          py::arg("filter") = std::string());
}
