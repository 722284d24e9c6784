import json
import math

import numpy as np
import pytest

import wkam


def grid(n):
    return np.arange(n) / n


def test_model_evaluation():
    m = wkam.Model.mechanical(1, [(1, 0, -1.0)])
    assert m.family == "quadratic-mechanical"
    assert m.H([0.0, 0.0], 0.0, [1.0, 0.0]) == pytest.approx(-0.5)
    d = wkam.Model.discounted(1, 1.0)
    assert d.L([0.3, 0.0], 3.0, [2.0, 0.0]) == pytest.approx(-1.0)


def test_fixed_point_certificate():
    m = wkam.Model.discounted(1, 1.0, [(1, 0, 1.0)])
    slab, report = wkam.fixed_point(m, np.sin(2 * np.pi * grid(128)), 1.0, 1 / 32)
    assert slab.shape == (33, 128)
    assert report["residual"] < 1e-10
    assert report["bound_respected"]


def test_exponential_decay():
    m = wkam.Model.discounted(1, 1.0)
    u = wkam.step(m, np.full(32, 2.0), 1.0, 1e-3, v_max=32.0)
    assert np.max(np.abs(u - 2.0 * math.exp(-1.0))) < 1e-3


def test_lax_friedrichs_agrees():
    m = wkam.Model.discounted(1, 1.0, [(1, 0, 1.0)])
    phi = 0.5 * np.sin(2 * np.pi * grid(256))
    var = wkam.step(m, phi, 1.0, 1 / 64, v_max=3.5)
    lf = wkam.lax_friedrichs(m, phi, 1.0, alpha=3.6)
    assert np.max(np.abs(var - lf)) < 0.05


def test_critical_value_and_convergence():
    m = wkam.Model.mechanical(1, [(1, 0, 1.0)])
    c = wkam.critical_value(m, 64, 1 / 16)
    assert abs(c["c"] - 1.0) < 2e-2
    r = wkam.converge(m.normalize(c["c"]), 0.5 * np.sin(2 * np.pi * grid(128)), 1 / 16)
    assert r["converged"]
    assert r["residual_max"] < 5e-2
    res = wkam.weak_kam_residual(m.normalize(c["c"]), r["u_inf"])
    assert res["kink_count"] <= 2


def test_flow_and_action():
    m = wkam.Model.mechanical(1)
    states, law_rms, sign_ok = wkam.flow(m, [0.2, 0.0], 0.5, [0.3, 0.0], 1.0, 1e-2)
    assert states[-1, 1] == pytest.approx(0.5)
    assert sign_ok
    h = wkam.min_action(m, 64, 0.5, 1 / 32, v_max=2.0)
    assert h.shape == (64, 64)
    assert h[0, 16] == pytest.approx(0.0625, abs=5e-3)


def test_two_dimensional_fields():
    m = wkam.Model.discounted(2, 1.0, [(1, 1, 0.5)])
    x = grid(16)
    phi = 0.2 * np.sin(2 * np.pi * x)[:, None] * np.ones(16)[None, :]
    u = wkam.step(m, phi, 0.5, 1 / 8, v_max=2.0)
    assert u.shape == (16, 16)


def test_errors():
    m = wkam.Model.discounted(1, 40.0)
    with pytest.raises(wkam.ConfigError):
        wkam.step(m, np.zeros(32), 1.0, 1 / 16, v_max=2.0)


def test_cli_entry(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "model": {"family": "quadratic-discounted", "lambda": 1.0},
        "grid": {"N": 32, "dt": 0.0625, "v_max": 2.0},
        "initial": {"constant": 1.0},
    }))
    code, log, err = wkam.run("solve", str(cfg), str(tmp_path / "out"))
    assert code == 0, err
    assert (tmp_path / "out" / "manifest.json").exists()
    code, _, err = wkam.run("solve", str(cfg), str(tmp_path / "out"))
    assert code == 2
