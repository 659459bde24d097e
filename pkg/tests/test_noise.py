import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erasesim.noise import (
    BIASED,
    ERASURE,
    NoiseConfig,
    apply_erasure_replacement,
    biased_pauli_probs,
    sample_biased_gate_error,
    sample_gate_error,
    sample_spam_error,
    trial_rng,
)


def test_config_validation():
    NoiseConfig(p=0.0)
    NoiseConfig(p=0.5, r_e=1.0, p_m=1.0)
    with pytest.raises(ValueError):
        NoiseConfig(p=-0.1)
    with pytest.raises(ValueError):
        NoiseConfig(p=1.0)
    with pytest.raises(ValueError):
        NoiseConfig(p=0.1, r_e=1.5)
    with pytest.raises(ValueError):
        NoiseConfig(p=0.1, p_m=-1e-9)
    with pytest.raises(ValueError):
        NoiseConfig(p=0.1, mode="depolarizing")
    with pytest.raises(ValueError):
        NoiseConfig(p=0.1, mode=BIASED, r_e=0.5)
    with pytest.raises(ValueError):
        NoiseConfig(p=0.1, mode=BIASED, eta=0.0)
    with pytest.raises(ValueError):
        # 13 Paulis at p/eta with eta tiny exceeds unit probability
        NoiseConfig(p=0.2, mode=BIASED, eta=0.5)


def test_rate_split():
    cfg = NoiseConfig(p=0.04, r_e=0.75)
    assert cfg.p_e == pytest.approx(0.03)
    assert cfg.p_p == pytest.approx(0.01)


def test_biased_probs_budget():
    for kind in ("CNOT", "CZ"):
        probs = biased_pauli_probs(0.01, 100.0, kind)
        assert probs[0] == 0.0
        assert probs.shape == (16,)
        assert np.all(probs >= 0)
    cnot = biased_pauli_probs(0.01, math.inf, "CNOT")
    assert cnot[12] == pytest.approx(0.01)      # ZI (ancilla Z)
    assert cnot[3] == pytest.approx(0.005)      # IZ
    assert cnot[15] == pytest.approx(0.005)     # ZZ
    assert cnot.sum() == pytest.approx(0.02)
    cz = biased_pauli_probs(0.01, math.inf, "CZ")
    assert cz[12] == pytest.approx(0.01)
    assert cz[3] == pytest.approx(0.01)
    assert cz[15] == 0.0
    assert cz.sum() == pytest.approx(0.02)
    with pytest.raises(ValueError):
        biased_pauli_probs(0.01, 100.0, "SWAP")


def test_finite_bias_fills_other_paulis():
    probs = biased_pauli_probs(0.01, 100.0, "CZ")
    others = [i for i in range(1, 16) if i not in (3, 12)]
    for i in others:
        assert probs[i] == pytest.approx(1e-4)


def test_mode_guards():
    rng = trial_rng(0, 0)
    with pytest.raises(ValueError):
        sample_gate_error(NoiseConfig(p=0.1, mode=BIASED), rng)
    with pytest.raises(ValueError):
        sample_biased_gate_error(NoiseConfig(p=0.1), "CZ", rng)


def test_erasure_sampling_statistics():
    cfg = NoiseConfig(p=0.2, r_e=0.5)
    rng = trial_rng(12, 0)
    n = 200_000
    kinds = {"none": 0, "pauli": 0, "erasure": 0}
    payloads = np.zeros(16, int)
    for _ in range(n):
        ev = sample_gate_error(cfg, rng)
        kinds[ev.kind] += 1
        if ev.kind == "pauli":
            payloads[ev.payload] += 1
    assert kinds["erasure"] / n == pytest.approx(cfg.p_e, rel=0.05)
    assert kinds["pauli"] / n == pytest.approx(cfg.p_p, rel=0.05)
    assert payloads[0] == 0
    # the 15 non-identity payloads are uniform
    assert payloads[1:].min() > 0.8 * payloads[1:].mean()


def test_biased_sampling_statistics():
    cfg = NoiseConfig(p=0.05, mode=BIASED, eta=10.0)
    rng = trial_rng(13, 0)
    n = 200_000
    counts = np.zeros(16, int)
    for _ in range(n):
        ev = sample_biased_gate_error(cfg, "CNOT", rng)
        counts[ev.payload if ev.kind == "pauli" else 0] += 1
    probs = biased_pauli_probs(cfg.p, cfg.eta, "CNOT")
    for i in range(1, 16):
        assert counts[i] / n == pytest.approx(probs[i], rel=0.15)


def test_spam_and_replacement():
    rng = trial_rng(14, 0)
    cfg = NoiseConfig(p=0.0, p_m=0.3)
    hits = sum(sample_spam_error(cfg, rng) for _ in range(50_000))
    assert hits / 50_000 == pytest.approx(0.3, rel=0.05)
    draws = [apply_erasure_replacement(rng) for _ in range(40_000)]
    flat = np.array(draws).ravel()
    for pauli in range(4):
        assert np.mean(flat == pauli) == pytest.approx(0.25, rel=0.1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 10_000))
def test_trial_rng_reproducible(seed, trial):
    a = trial_rng(seed, trial).random(4)
    b = trial_rng(seed, trial).random(4)
    assert np.array_equal(a, b)


def test_trial_rng_independent_streams():
    assert not np.array_equal(trial_rng(0, 0).random(8), trial_rng(0, 1).random(8))
    assert not np.array_equal(trial_rng(0, 0).random(8), trial_rng(1, 0).random(8))
