import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from erasesim.montecarlo import (
    FitError,
    LogicalRateEstimate,
    estimate_logical_rate,
    estimate_threshold,
    fit_exponent,
    run_biased_comparison,
    run_spam_sweep,
    wilson_ci,
    write_sweep_csv,
    write_sweep_json,
)
from erasesim.noise import BIASED, NoiseConfig
from erasesim.xzzx import OBSERVABLE


def test_wilson_known_values():
    # textbook case: 10 successes in 100 trials at 95%
    lo, hi = wilson_ci(10, 100)
    assert lo == pytest.approx(0.0552, abs=2e-3)
    assert hi == pytest.approx(0.1744, abs=2e-3)
    lo, hi = wilson_ci(0, 50)
    assert lo == 0.0
    assert hi == pytest.approx(0.0713, abs=2e-3)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 1000))
def test_wilson_properties(k, n):
    if k > n:
        k = n
    lo, hi = wilson_ci(k, n)
    assert 0.0 <= lo <= hi <= 1.0
    if 0 < k < n:
        assert lo < k / n < hi


def test_wilson_coverage_is_nominal():
    # empirical coverage of the 95% interval near p = 0.1 should be ~95%
    rng = np.random.default_rng(0)
    p = 0.1
    n = 200
    hits = 0
    reps = 2000
    for k in rng.binomial(n, p, reps):
        lo, hi = wilson_ci(int(k), n)
        hits += lo <= p <= hi
    assert hits / reps == pytest.approx(0.95, abs=0.02)


def test_wilson_rejects_zero_trials():
    with pytest.raises(ValueError):
        wilson_ci(0, 0)


def test_zero_noise_shortcut():
    est = estimate_logical_rate(NoiseConfig(p=0.0), 3, 1000)
    assert est.trials == 1000
    assert est.failures == 0
    assert est.p_l == 0.0


def test_trials_validation():
    with pytest.raises(ValueError):
        estimate_logical_rate(NoiseConfig(p=0.01), 3, 0)


def test_deterministic_across_workers():
    cfg = NoiseConfig(p=0.03, r_e=0.5, seed=42)
    a = estimate_logical_rate(cfg, 3, 120_000, chunk_size=16384, workers=1)
    b = estimate_logical_rate(cfg, 3, 120_000, chunk_size=16384, workers=3)
    assert (a.trials, a.failures) == (b.trials, b.failures)


def test_deterministic_rerun():
    cfg = NoiseConfig(p=0.02, r_e=0.9, seed=7)
    a = estimate_logical_rate(cfg, 3, 50_000)
    b = estimate_logical_rate(cfg, 3, 50_000)
    assert (a.trials, a.failures) == (b.trials, b.failures)


def test_seed_changes_counts():
    a = estimate_logical_rate(NoiseConfig(p=0.03, r_e=0.5, seed=0), 3, 50_000)
    b = estimate_logical_rate(NoiseConfig(p=0.03, r_e=0.5, seed=1), 3, 50_000)
    assert a.failures != b.failures


def test_min_failures_stops_early():
    cfg = NoiseConfig(p=0.08, r_e=0.0, seed=0)
    est = estimate_logical_rate(cfg, 3, 10_000_000, min_failures=50,
                                chunk_size=4096)
    assert est.failures >= 50
    assert est.trials < 10_000_000
    assert est.trials % 4096 == 0


def test_logical_rate_statistically_consistent_with_reference(code3):
    """The compiled sampling pipeline and the pure-Python frame simulator
    must estimate the same failure probability."""
    from erasesim.frames import run_trial
    from erasesim.graph import build_graph, overlay_erasures
    from erasesim.ufdecode import decode

    lattice, schedule = code3
    cfg = NoiseConfig(p=0.04, r_e=0.5, seed=9)
    graph = build_graph(lattice, schedule, cfg)
    rng = np.random.default_rng(1234)
    n_ref = 4000
    fails = 0
    for _ in range(n_ref):
        trial = run_trial(lattice, schedule, cfg, rng)
        overlay = overlay_erasures(graph, trial.erasures)
        res = decode(graph, overlay, trial.detectors.ravel().astype(np.uint8))
        fails += bool(res.parities[OBSERVABLE] != trial.true_parities[OBSERVABLE])
    fast = estimate_logical_rate(cfg, 3, 400_000)
    # two-proportion z-test at 4 sigma
    p_pool = (fails + fast.failures) / (n_ref + fast.trials)
    se = math.sqrt(p_pool * (1 - p_pool) * (1 / n_ref + 1 / fast.trials))
    assert abs(fails / n_ref - fast.p_l) < 4 * se


def test_threshold_rejects_equal_distances():
    with pytest.raises(ValueError):
        estimate_threshold(NoiseConfig(p=0.0), (3, 3), [0.01, 0.02], 100)


def test_threshold_no_crossing_raises_fit_error():
    cfg = NoiseConfig(p=0.0, r_e=0.0, seed=0)
    with pytest.raises(FitError):
        estimate_threshold(cfg, (3, 5), [0.001, 0.0015, 0.002, 0.0025], 2000)


def test_threshold_smoke():
    # d=(3,5) curves cross well above the d=(5,7) threshold; this checks
    # the fit machinery, not the physics
    cfg = NoiseConfig(p=0.0, r_e=0.0, seed=0)
    grid = list(np.linspace(0.005, 0.010, 5))
    est = estimate_threshold(cfg, (3, 5), grid, 20_000)
    assert grid[0] < est.p_th < grid[-1]
    assert est.uncertainty > 0
    assert len(est.points) == 10
    assert set(est.coefficients) == {"A", "B", "C"}
    scaled = est.scaled(2.0)
    assert scaled.p_th == pytest.approx(2 * est.p_th)
    assert scaled.window == (2 * grid[0], 2 * grid[-1])


def test_exponent_validation():
    cfg = NoiseConfig(p=0.0)
    with pytest.raises(ValueError):
        fit_exponent(cfg, 3, [0.001, 0.002, 0.003], 0.01, 100)
    with pytest.raises(ValueError):
        fit_exponent(cfg, 3, [0.001, 0.002, 0.003, 0.02], 0.01, 100)


def test_exponent_zero_failures_raises_fit_error():
    cfg = NoiseConfig(p=0.0, seed=0)
    with pytest.raises(FitError):
        fit_exponent(cfg, 3, [1e-6, 2e-6, 3e-6, 4e-6], 0.01, 100)


def test_biased_comparison_guard():
    with pytest.raises(ValueError):
        run_biased_comparison(NoiseConfig(p=0.0), (3, 5), [0.01], 100)


def test_spam_sweep_tracking_proxy_couples_p_m():
    """The "p" entry must simulate with p_m equal to each grid point."""
    cfg = NoiseConfig(p=0.0, r_e=0.5, seed=0)
    grid = list(np.linspace(0.006, 0.012, 4))
    out = run_spam_sweep(cfg, ["p"], (3, 5), grid, 10_000)
    label, est = out[0]
    assert label == "p_m=p"
    for pt in est.points:
        assert pt.p_m == pytest.approx(pt.p)


def test_sweep_csv_and_json(tmp_path):
    est = estimate_logical_rate(NoiseConfig(p=0.02, r_e=0.5), 3, 10_000)
    csv_path = tmp_path / "sweep.csv"
    write_sweep_csv(str(csv_path), [est])
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "d"
    assert int(rows[1][0]) == 3
    assert float(rows[1][7]) == est.p_l

    json_path = tmp_path / "sweep.json"
    write_sweep_json(str(json_path), {"points": [est]})
    doc = json.loads(json_path.read_text())
    assert doc["format"] == "erasesim-sweep/1"
    assert doc["points"][0]["failures"] == est.failures
