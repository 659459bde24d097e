"""Circuit-level noise channels.

Two-qubit gate errors come in two modes:

* ``erasure``: with probability p*(1-R_e) one of the 15 non-identity
  two-qubit Paulis (uniform), with probability p*R_e a heralded erasure.
  An erasure replaces both atoms by fresh ones in a maximally mixed
  state, modelled as independent uniform single-qubit Paulis; an erased
  ancilla therefore reports a fair-coin measurement outcome.
* ``biased``: dephasing-biased Pauli noise with bias eta (eta = inf
  allowed), with bias-preserving CNOTs. No erasures in this mode.

Init/measurement (SPAM) errors flip the affected bit with probability
p_m in either mode.

Pauli payloads are encoded as integers 0..15 = 4*p_first + p_second with
I,X,Y,Z = 0,1,2,3; the first slot is the control (ancilla) qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ERASURE = "erasure"
BIASED = "biased"

_DEPHASING_CODES_CNOT = {12: "ZI", 3: "IZ", 15: "ZZ"}  # ZI, IZ, ZZ
_DEPHASING_CODES_CZ = {12: "ZI", 3: "IZ"}


@dataclass(frozen=True)
class NoiseConfig:
    p: float
    r_e: float = 0.0
    p_m: float = 0.0
    mode: str = ERASURE
    eta: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must be in [0, 1), got {self.p}")
        if not 0.0 <= self.r_e <= 1.0:
            raise ValueError(f"R_e must be in [0, 1], got {self.r_e}")
        if not 0.0 <= self.p_m <= 1.0:
            raise ValueError(f"p_m must be in [0, 1], got {self.p_m}")
        if self.mode not in (ERASURE, BIASED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == BIASED:
            if self.r_e != 0.0:
                raise ValueError("biased mode does not support erasures")
            if not self.eta > 0:
                raise ValueError("eta must be positive")
            if max(biased_pauli_probs(self.p, self.eta, "CNOT").sum(),
                   biased_pauli_probs(self.p, self.eta, "CZ").sum()) > 1.0:
                raise ValueError("biased error probabilities exceed 1")

    @property
    def p_e(self) -> float:
        return self.p * self.r_e

    @property
    def p_p(self) -> float:
        return self.p * (1.0 - self.r_e)


@dataclass(frozen=True)
class GateErrorEvent:
    """kind: 'none', 'pauli' (with payload 1..15) or 'erasure'."""

    kind: str
    payload: int = 0
    location: tuple[int, int] | None = None  # (round, gate index)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, reproducible stream for one Monte Carlo trial."""
    return np.random.default_rng([seed, trial])


def sample_gate_error(cfg: NoiseConfig, rng: np.random.Generator,
                      location: tuple[int, int] | None = None) -> GateErrorEvent:
    if cfg.mode != ERASURE:
        raise ValueError("sample_gate_error requires erasure mode")
    u = rng.random()
    if u < cfg.p_e:
        return GateErrorEvent("erasure", location=location)
    if u < cfg.p:
        payload = 1 + int(rng.integers(15))
        return GateErrorEvent("pauli", payload=payload, location=location)
    return GateErrorEvent("none", location=location)


def apply_erasure_replacement(rng: np.random.Generator) -> tuple[int, int]:
    """Replacement Paulis (first qubit, second qubit), each uniform I/X/Y/Z."""
    return int(rng.integers(4)), int(rng.integers(4))


def sample_spam_error(cfg: NoiseConfig, rng: np.random.Generator) -> bool:
    return bool(rng.random() < cfg.p_m)


def biased_pauli_probs(p: float, eta: float, gate_kind: str) -> np.ndarray:
    """Probability of each of the 16 two-qubit Paulis for one biased gate.

    CNOT (bias-preserving): ZI at p, IZ and ZZ at p/2. CZ: ZI and IZ at
    p. Every other non-identity Pauli occurs at p/eta (0 at eta = inf).
    """
    if gate_kind not in ("CNOT", "CZ"):
        raise ValueError(f"unknown gate kind {gate_kind!r}")
    other = 0.0 if math.isinf(eta) else p / eta
    probs = np.full(16, other)
    probs[0] = 0.0
    if gate_kind == "CNOT":
        probs[12] = p          # ZI
        probs[3] = p / 2       # IZ
        probs[15] = p / 2      # ZZ
    else:
        probs[12] = p
        probs[3] = p
    return probs


def sample_biased_gate_error(cfg: NoiseConfig, gate_kind: str,
                             rng: np.random.Generator,
                             location: tuple[int, int] | None = None) -> GateErrorEvent:
    if cfg.mode != BIASED:
        raise ValueError("sample_biased_gate_error requires biased mode")
    probs = biased_pauli_probs(cfg.p, cfg.eta, gate_kind)
    u = rng.random()
    acc = 0.0
    for payload in range(1, 16):
        acc += probs[payload]
        if u < acc:
            return GateErrorEvent("pauli", payload=payload, location=location)
    return GateErrorEvent("none", location=location)
