# Copyright (C) 2026 The glcd authors
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import glcd

SMALL = dict(frames=10, channels=2, height=4, width=4, clip_length=4, steps=4, denoiser="linear_gaussian")


def test_default_config_round_trips():
    text = glcd.default_config()
    assert "gamma0: 0.005" in text
    assert glcd.normalize_config("") == text
    assert set(glcd.config_keys()) <= {line.split(":")[0] for line in text.splitlines()}


def test_run_is_seeded():
    a = glcd.run(**SMALL, seed=3)
    b = glcd.run(**SMALL, seed=3)
    c = glcd.run(**SMALL, seed=4)
    assert a["z0"].shape == (10, 2, 4, 4)
    assert a["z0"].dtype == np.float32
    assert np.array_equal(a["z0"], b["z0"])
    assert not np.array_equal(a["z0"], c["z0"])
    assert a["report_csv"] == b["report_csv"]
    assert len(a["reports"]) == 4
    assert a["reports"][-1]["t_next"] == 0


def test_gamma_schedule():
    assert glcd.annealing_gamma(0) == pytest.approx(0.005)
    assert glcd.annealing_gamma(1000) == pytest.approx(0.005 * math.exp(0.5))
    report = glcd.run(**SMALL)["reports"]
    assert report[0]["gamma"] > report[-1]["gamma"]


def test_clip_maps():
    assert glcd.global_maps(8, 4, 2) == [[0, 2, 4, 6], [1, 3, 5, 7]]
    assert glcd.local_maps(8, 8, 4, 500, seed=9) == [list(range(8))]
    for maps in (glcd.local_maps(13, 4, 2, t, seed=1) for t in range(1, 40)):
        covered = {f for m in maps for f in m}
        assert covered == set(range(13))


def test_fuse_against_numpy():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((3, 2, 2, 2)).astype(np.float32)
    l = rng.standard_normal((3, 2, 2, 2)).astype(np.float32)
    out = glcd.glcd_fuse(g, l, 0.3)
    assert np.allclose(out, 0.3 * g + 0.7 * l, atol=1e-6)
    assert np.array_equal(glcd.glcd_fuse(g, g, 0.3), g)


def test_lowpass_mask_is_symmetric():
    h = glcd.lowpass_mask(6, 4, 4, "gaussian", 0.25)
    assert h.shape == (6, 4, 4)
    assert h[0, 0, 0] == 1.0
    flipped = np.roll(h[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))
    assert np.array_equal(h, flipped)


def test_latent_files(tmp_path):
    z = np.arange(2 * 3 * 2 * 2, dtype=np.float32).reshape(2, 3, 2, 2) / 10 - 1
    path = tmp_path / "z.npy"
    glcd.save_latent(str(path), z)
    assert np.array_equal(np.load(path), z)
    assert np.array_equal(glcd.load_latent(str(path)), z)
    frames = glcd.export_frames(z, str(tmp_path / "frames"), "clamp")
    assert len(frames) == 2
    assert (tmp_path / "frames" / "frame_00001.ppm").read_bytes().startswith(b"P6\n2 2\n255\n")
    csv = glcd.metrics_csv(z)
    assert csv.startswith("# proxy metrics")
    assert "index,flicker,smoothness,patch_consistency" in csv


def test_errors_map_to_python():
    with pytest.raises(glcd.ConfigError, match="gamma0"):
        glcd.run(gamma0=2.0)
    with pytest.raises(glcd.ConfigError, match="unknown key"):
        glcd.normalize_config("nonsense: 1\n")
    with pytest.raises(glcd.GlcdError):
        glcd.global_maps(8, 2, 1)
    with pytest.raises(glcd.FormatError):
        glcd.load_latent(__file__)


def test_criteria_subset():
    results = glcd.run_criteria("fusion")
    assert [r["id"] for r in results] == [1]
    assert results[0]["passed"]
