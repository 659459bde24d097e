"""Pauli-frame propagation through the syndrome-extraction circuit.

The frame stores one (x, z) flip bit per qubit relative to the noiseless
circuit; stochastic Pauli noise plus measurement flips make this exact.
Each noisy round runs six steps (prep, four gate steps, measure), and the
trial ends with one extra noiseless round. Detector bits are the time
differences of consecutive raw syndrome bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import (
    BIASED,
    ERASURE,
    NoiseConfig,
    apply_erasure_replacement,
    sample_biased_gate_error,
    sample_gate_error,
    sample_spam_error,
)
from .xzzx import Gate, Lattice, Schedule


@dataclass
class PauliFrame:
    x: np.ndarray  # uint8, one bit per qubit
    z: np.ndarray

    @classmethod
    def zeros(cls, n_qubits: int) -> "PauliFrame":
        return cls(np.zeros(n_qubits, np.uint8), np.zeros(n_qubits, np.uint8))

    def apply_pauli(self, qubit: int, pauli: int) -> None:
        # pauli: 0=I 1=X 2=Y 3=Z
        if pauli in (1, 2):
            self.x[qubit] ^= 1
        if pauli in (2, 3):
            self.z[qubit] ^= 1


def propagate(frame: PauliFrame, gate: Gate) -> None:
    """Conjugate the frame through one CZ or CNOT (in place).

    CZ: an X flip on either qubit deposits a Z flip on the other.
    CNOT: X on the control copies to the target, Z on the target copies
    to the control.
    """
    a, d = gate.ancilla, gate.data
    if gate.kind == "CZ":
        xa, xd = frame.x[a], frame.x[d]
        frame.z[d] ^= xa
        frame.z[a] ^= xd
    elif gate.kind == "CNOT":
        frame.x[d] ^= frame.x[a]
        frame.z[a] ^= frame.z[d]
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {gate.kind!r}")


@dataclass
class SyndromeTrial:
    detectors: np.ndarray  # (rounds+1, n_anc) uint8
    raw: np.ndarray  # raw syndrome bits, same shape
    erasures: list[tuple[int, int]]  # (round, gate index) heralds
    true_parities: np.ndarray  # (2,) uint8, one bit per logical operator
    residual: PauliFrame | None = None
    randomized_measurements: list[tuple[int, int]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "format": "erasesim-trial/1",
            "detectors": self.detectors.tolist(),
            "erasures": [list(e) for e in self.erasures],
            "true_parities": self.true_parities.tolist(),
        }


def _logical_parities(lattice: Lattice, frame: PauliFrame) -> np.ndarray:
    out = np.zeros(2, np.uint8)
    n = lattice.n_data
    for k, (lx, lz) in enumerate(lattice.logicals):
        out[k] = (int(np.dot(frame.x[:n], lz)) + int(np.dot(frame.z[:n], lx))) % 2
    return out


def _detectors_from_raw(raw: np.ndarray) -> np.ndarray:
    det = raw.copy()
    det[1:] ^= raw[:-1]
    return det


def run_trial(lattice: Lattice, schedule: Schedule, cfg: NoiseConfig,
              rng: np.random.Generator, rounds: int | None = None) -> SyndromeTrial:
    """Simulate one noisy trial: `rounds` noisy rounds plus a perfect one.

    Ancillas are freshly prepared each round. An erasure replaces both
    qubits of the gate with uniform random Paulis; on an ancilla this
    randomizes the upcoming measurement outcome (noted in
    ``randomized_measurements``).
    """
    if rounds is None:
        rounds = lattice.d
    n_data, n_anc = lattice.n_data, lattice.n_anc
    frame = PauliFrame.zeros(lattice.n_qubits)
    raw = np.zeros((rounds + 1, n_anc), np.uint8)
    erasures: list[tuple[int, int]] = []
    randomized: list[tuple[int, int]] = []

    for t in range(rounds + 1):
        noisy = t < rounds
        # ancilla prep
        frame.x[n_data:] = 0
        frame.z[n_data:] = 0
        if noisy and cfg.p_m > 0:
            for a in range(n_anc):
                if sample_spam_error(cfg, rng):
                    frame.z[n_data + a] ^= 1
        # gate steps
        for g_idx, gate in enumerate(schedule.gates):
            propagate(frame, gate)
            if not noisy:
                continue
            if cfg.mode == ERASURE:
                event = sample_gate_error(cfg, rng, (t, g_idx))
            else:
                event = sample_biased_gate_error(cfg, gate.kind, rng, (t, g_idx))
            if event.kind == "pauli":
                frame.apply_pauli(gate.ancilla, event.payload // 4)
                frame.apply_pauli(gate.data, event.payload % 4)
            elif event.kind == "erasure":
                erasures.append((t, g_idx))
                pa, pd = apply_erasure_replacement(rng)
                frame.apply_pauli(gate.ancilla, pa)
                frame.apply_pauli(gate.data, pd)
                randomized.append((t, gate.ancilla - n_data))
        # ancilla measurement (X basis: flipped by a Z frame)
        for a in range(n_anc):
            bit = frame.z[n_data + a]
            if noisy and cfg.p_m > 0 and sample_spam_error(cfg, rng):
                bit ^= 1
            raw[t, a] = bit

    return SyndromeTrial(
        detectors=_detectors_from_raw(raw),
        raw=raw,
        erasures=erasures,
        true_parities=_logical_parities(lattice, frame),
        residual=frame,
        randomized_measurements=randomized,
    )


def injected_trial(lattice: Lattice, schedule: Schedule, rounds: int,
                   gate_injections: list[tuple[int, int, int, int]] = (),
                   prep_flips: list[tuple[int, int]] = (),
                   meas_flips: list[tuple[int, int]] = ()) -> SyndromeTrial:
    """Deterministic noiseless run with explicit injected faults.

    gate_injections: (round, gate index, pauli on ancilla, pauli on data),
    applied immediately after that gate. prep_flips / meas_flips:
    (round, ancilla index) bit flips at prep / measurement.
    """
    n_data, n_anc = lattice.n_data, lattice.n_anc
    frame = PauliFrame.zeros(lattice.n_qubits)
    raw = np.zeros((rounds + 1, n_anc), np.uint8)
    gate_inj: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for t, g, pa, pd in gate_injections:
        gate_inj.setdefault((t, g), []).append((pa, pd))
    prep_set = set(prep_flips)
    meas_set = set(meas_flips)

    for t in range(rounds + 1):
        frame.x[n_data:] = 0
        frame.z[n_data:] = 0
        for a in range(n_anc):
            if (t, a) in prep_set:
                frame.z[n_data + a] ^= 1
        for g_idx, gate in enumerate(schedule.gates):
            propagate(frame, gate)
            for pa, pd in gate_inj.get((t, g_idx), ()):
                frame.apply_pauli(gate.ancilla, pa)
                frame.apply_pauli(gate.data, pd)
        for a in range(n_anc):
            raw[t, a] = frame.z[n_data + a] ^ ((t, a) in meas_set)

    return SyndromeTrial(
        detectors=_detectors_from_raw(raw),
        raw=raw,
        erasures=[],
        true_parities=_logical_parities(lattice, frame),
        residual=frame,
    )
