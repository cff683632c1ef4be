"""Experiment harness: spec validation, report plumbing, reduced runs.

Full-size experiment configs run in the acceptance suite; here each
experiment runs at a reduced size that still exercises every rule, plus
unit checks for the helpers the experiments lean on.
"""

import json
import math

import numpy as np
import pytest
from numpy.random import default_rng
from scipy.linalg import expm

from cadlag_rough.harness import (ExperimentSpec, _area_statistic,
                                  _config_hash, _correlated_area_lift,
                                  _jump_limit, _pmap, _polyline_ode,
                                  _ramp_path, _sum_paths, default_spec,
                                  run_experiment)
from cadlag_rough.cadlag import CadlagPath, value_at
from cadlag_rough.lift import log_increments
from cadlag_rough.rde import linear_fields
from cadlag_rough.stochastic import model_from_spec, simulate


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        ExperimentSpec("not_an_experiment").validate()
    with pytest.raises(ValueError):
        ExperimentSpec("metric_demo", samples=0).validate()
    with pytest.raises(ValueError):
        ExperimentSpec("wong_zakai", meshes=[64, 32]).validate()


def test_config_hash_tracks_config():
    a = default_spec("metric_demo")
    b = default_spec("metric_demo")
    assert _config_hash(a.config()) == _config_hash(b.config())
    b.seed = 17
    assert _config_hash(a.config()) != _config_hash(b.config())


def test_pmap_preserves_order():
    serial = _pmap(lambda k: k * k, 20, threads=1)
    threaded = _pmap(lambda k: k * k, 20, threads=4)
    assert serial == [k * k for k in range(20)]
    assert threaded == serial


def test_metric_demo_passes_and_is_deterministic():
    rep1 = run_experiment(default_spec("metric_demo"))
    rep2 = run_experiment(default_spec("metric_demo"))
    assert rep1.passed
    d1, d2 = rep1.to_dict(), rep2.to_dict()
    d1.pop("runtime_s"), d2.pop("runtime_s")
    assert d1 == d2
    assert len(rep1.rows) == len(rep1.details["ns"])


def test_report_files_roundtrip(tmp_path):
    spec = default_spec("metric_demo", out_dir=str(tmp_path))
    rep = run_experiment(spec)
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["passed"] is True
    assert data["config_hash"] == rep.config_hash
    assert all(set(r) >= {"rule", "passed", "detail"} for r in data["rules"])
    lines = (tmp_path / "samples.csv").read_text().strip().splitlines()
    assert lines[0].split(",")[0] == "config_hash"
    assert lines[0].split(",")[1:] == list(rep.columns)
    assert all(ln.split(",")[0] == rep.config_hash for ln in lines[1:])


def test_ramp_and_jump_helpers():
    ramp = _ramp_path(0.5, 1.0, [2.0, 0.0])
    assert not ramp.jump_mask.any()
    ts = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0])
    vals = value_at(ramp, ts)
    assert np.allclose(vals[:, 0], [0, 0, 0, 1.0, 2.0, 2.0, 2.0])
    other = _ramp_path(0.0, 0.5, [0.0, 1.0])
    s = _sum_paths(ramp, other)
    assert np.allclose(value_at(s, ts), vals + value_at(other, ts))
    lim = _jump_limit([1.0, 1.0])
    assert list(lim.jump_mask) == [False, True, False]
    assert np.allclose(lim.values[1], [1.0, 1.0])


def test_corrected_lift_adds_running_bracket():
    rng = default_rng(3)
    times = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 14)), [1.0]])
    values = rng.normal(size=(16, 2))
    path = CadlagPath(times, values, jump_mask=np.zeros(16, bool))
    corrected = _correlated_area_lift(path)
    _, a = log_increments(corrected)
    dv = np.diff(values, axis=0)
    assert np.allclose(a[:, 0, 1], 0.5 * dv[:, 0] * dv[:, 1], atol=1e-12)
    assert np.allclose(a[:, 1, 0], -a[:, 0, 1], atol=1e-12)

    wide = CadlagPath([0.0, 1.0], np.zeros((2, 3)),
                      jump_mask=np.zeros(2, bool))
    with pytest.raises(ValueError):
        _correlated_area_lift(wide)


def test_polyline_ode_matches_matrix_exponential():
    A = np.array([[[0.0, 0.3], [-0.2, 0.1]]])
    fields = linear_fields(A)
    y0 = np.array([1.0, -0.5])
    got = _polyline_ode(fields, np.array([[0.0], [1.0]]), y0)
    assert np.allclose(got, expm(A[0]) @ y0, atol=1e-10)


def test_area_statistic_exactly_zero_for_line():
    model = model_from_spec({"kind": "levy", "d": 2, "lam": 0.0,
                             "drift": [1.0, 0.5]})
    sp = simulate(model, 65, seed=0)
    for part in (sp.grid[::8], sp.grid[::16]):
        assert _area_statistic(sp, part, "const") == 0.0
        assert _area_statistic(sp, part, "tanh_x1") == 0.0
    with pytest.raises(ValueError):
        _area_statistic(sp, sp.grid[::8], "cubic")


def test_wong_zakai_reduced():
    spec = default_spec("wong_zakai")
    spec.samples = 12
    spec.meshes = [8, 32, 128]
    rep = run_experiment(spec)
    assert rep.passed, rep.rules
    meds = [m["median"] for m in rep.per_mesh]
    assert meds == sorted(meds, reverse=True)
    assert rep.details["floor_median"] > 0


def test_wong_zakai_hoff_reduced():
    spec = default_spec("wong_zakai_hoff")
    spec.samples = 25
    spec.options["cells"] = 256
    rep = run_experiment(spec)
    assert rep.passed, rep.rules
    # the commutator correction must be a detected signal, not noise
    z = np.abs(rep.details["mean_gap_marcus"]) / rep.details["se_marcus"]
    assert z.max() > 10


def test_bdg_reduced_and_scaling_exact():
    spec = default_spec("bdg_ratio")
    spec.samples = 60
    spec.options.update(grid_samples=20, cells=128)
    rep = run_experiment(spec)
    assert rep.passed, rep.rules
    cells = rep.details["cells"]
    # doubling the model rescales every sample path exactly, so the ratio
    # is bit-identical, not merely within tolerance
    assert cells["bm_T1.0_s1.0"]["ratio"] == cells["bm_T1.0_s2.0"]["ratio"]
    assert 1.0 <= rep.details["band_spread"] <= 3.0


def test_area_vanish_reduced():
    spec = default_spec("area_vanish")
    spec.samples = 30
    spec.meshes = [16, 64, 256]
    spec.options["fine_cells"] = 1024
    rep = run_experiment(spec)
    assert rep.passed, rep.rules


def test_marcus_consistency_reduced():
    spec = default_spec("marcus_consistency")
    spec.samples = 6
    spec.options.update(cells=128, ode_drivers=2)
    rep = run_experiment(spec)
    assert rep.passed, rep.rules
    assert rep.details["max_gap"] <= 1e-6
    assert rep.details["max_ode_gap"] <= 1e-8


def test_default_spec_unknown_name():
    with pytest.raises(ValueError):
        default_spec("nope")


def test_reports_carry_mesh_stats():
    spec = default_spec("area_vanish")
    spec.samples = 8
    spec.meshes = [16, 64]
    spec.options["fine_cells"] = 256
    rep = run_experiment(spec)
    for stats in rep.details["per_model"].values():
        for st in stats:
            assert {"median", "mean", "se_mean", "se_median",
                    "cells"} <= set(st)
