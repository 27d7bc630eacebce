"""Smoke tests for the python bindings: import, a few exact values, and a
tiny deterministic end-to-end run."""

import json
import math

import pytest

import coopnav


def test_edge_sets_match_the_schedule():
    assert coopnav.edge_set(4, 0) == [(0, 1), (2, 3)]
    assert coopnav.edge_set(4, 2) == [(0, 2), (1, 3)]
    assert coopnav.edge_set(7, 0) == [(0, 1), (2, 3), (4, 5)]
    assert coopnav.edge_set(4, 3) == coopnav.edge_set(4, 0)


def test_schedule_counts():
    assert [coopnav.vertices_reached(k) for k in range(4)] == [2, 4, 8, 12]
    assert coopnav.steps_lower_bound(16) == 6
    assert coopnav.propagation_steps(2) == 1
    assert coopnav.propagation_steps(8) >= coopnav.steps_lower_bound(8)


def test_map_generation_and_sampling(tmp_path):
    spec = coopnav.SyntheticMapSpec()
    spec.seed = 7
    spec.extent_east = 2000.0
    spec.extent_north = 1000.0
    spec.cell_size = 100.0
    spec.baseline = 55.0
    grid = coopnav.generate_synthetic(spec)
    assert grid.n_cols == 21 and grid.n_rows == 11
    assert grid.sample(123.4, 567.8) == pytest.approx(55.0)
    assert grid.try_sample(-1.0, 0.0) is None

    smoothed = coopnav.degrade_resolution(grid, 300.0)
    assert smoothed.n_cols == grid.n_cols

    path = tmp_path / "grid.txt"
    coopnav.save_grid(grid, str(path))
    again = coopnav.load_grid(str(path))
    assert again.values == grid.values


def test_reference_velocity_and_rotation():
    assert coopnav.reference_velocity(10.0, 50.0, 0.05, 0.0, 0.0) == pytest.approx(50.0)
    x, y = coopnav.rotate_relative(1.0, 0.0, math.pi / 2)
    assert x == pytest.approx(0.0, abs=1e-12)
    assert y == pytest.approx(1.0)


CONFIG = {
    "group_size": 2,
    "duration_s": 60.0,
    "noise": {"sigma_r_m": 1.0, "sigma_m_nt": 10.0, "sigma_v_mps": 0.3, "sigma_g_degps": 0.005},
    "pf": {"particle_count": 120},
    "map": {"synthetic": {"seed": 424242, "cell_size_m": 100.0, "bump_density_per_km2": 0.25}},
}


def test_run_trial_is_deterministic():
    cfg = coopnav.parse_trial_config(json.dumps(CONFIG))
    a = coopnav.run_trial(cfg, 5, with_series=True)
    b = coopnav.run_trial(cfg, 5, with_series=True)
    assert a["avg_position_error_m"] == b["avg_position_error_m"]
    assert a["pf_error_series_m"] == b["pf_error_series_m"]
    assert not a["aborted"]

    c = coopnav.run_trial(cfg, 6)
    assert c["avg_position_error_m"] != a["avg_position_error_m"]


def test_monte_carlo_summary_shape():
    cfg = coopnav.parse_trial_config(json.dumps(CONFIG))
    s = coopnav.run_monte_carlo(cfg, 3, 99, 1)
    assert s["n_trials"] == 3
    assert len(s["trials"]) == 3
    assert s["mean_avg_position_error_m"] > 0.0
    assert s["mean_dr_final_error_m"] > 0.0
    # config attributes are adjustable from python
    cfg.group_size = 3
    cfg.particle_count = 60
    s3 = coopnav.run_monte_carlo(cfg, 2, 99, 1)
    assert s3["n_trials"] == 2
