# Copyright (C) 2026 The glcd authors
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the glcd long-video denoising engine."""

import json

from ._glcd import (
    ConfigError,
    FormatError,
    GlcdError,
    annealing_gamma,
    config_keys,
    default_config,
    export_frames,
    global_maps,
    glcd_fuse,
    load_latent,
    local_maps,
    lowpass_mask,
    metrics_csv,
    normalize_config,
    run_criteria,
    save_latent,
)
from ._glcd import run as _run

__all__ = [
    "ConfigError",
    "FormatError",
    "GlcdError",
    "annealing_gamma",
    "config_keys",
    "config_yaml",
    "default_config",
    "export_frames",
    "global_maps",
    "glcd_fuse",
    "load_latent",
    "local_maps",
    "lowpass_mask",
    "metrics_csv",
    "normalize_config",
    "run",
    "run_criteria",
    "save_latent",
]


def _yaml_scalar(value):
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    # A JSON string is a valid YAML double-quoted scalar.
    return json.dumps(str(value))


def config_yaml(base="", **overrides):
    """YAML text of `base` with keyword overrides appended."""
    lines = [base.rstrip("\n")] if base else []
    lines += [f"{key}: {_yaml_scalar(value)}" for key, value in overrides.items()]
    return "\n".join(lines) + "\n"


def run(config="", **overrides):
    """Runs the sampler. Returns a dict with z0, z_init, reports, report_csv, seed."""
    return _run(config_yaml(config, **overrides))
