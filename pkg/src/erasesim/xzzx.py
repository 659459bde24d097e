"""Planar XZZX surface-code lattice and six-step syndrome schedule.

Geometry: data qubits on a d x d grid at integer coordinates (row, col).
Plaquette ancillas sit at half-integer centers (r+1/2, c+1/2). Every
plaquette measures the same XZZX stabilizer: X on its NW and SE data
qubits, Z on its NE and SW data qubits. Boundary plaquettes are bulk
checks truncated to the qubits that exist.

The syndrome circuit for one round has six steps: ancilla preparation in
|+>, four two-qubit gate steps (one per leg, in fixed NW, NE, SW, SE
order), and ancilla measurement in the X basis. X legs use a CNOT with
the ancilla as control; Z legs use a CZ.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PAULI_I, PAULI_X, PAULI_Y, PAULI_Z = 0, 1, 2, 3

# Leg order within a plaquette (= gate-step assignment), applied uniformly
# to every plaquette. Only 8 of the 24 uniform orders keep the circuit
# graphlike (every single-qubit fault fires at most 2 detectors). For any
# graphlike order, a mid-circuit ancilla X error after the second gate step
# spreads onto the two remaining legs, forming a two-data-qubit "hook"
# aligned with a row or a column: one of the two logical operators keeps
# the full circuit fault distance d while the other drops to (d + 1) / 2.
# With this order the hooks are horizontal, so the row logical (index 0,
# flipped by top-to-bottom error chains) keeps distance d; it is the
# observable tracked by the Monte Carlo harness (see OBSERVABLE).
LEG_ORDER = ("NW", "NE", "SW", "SE")

# Index of the logical operator whose fault distance the schedule
# preserves; the memory experiment reports failures of this observable.
OBSERVABLE = 0
LEG_OFFSETS = {"NW": (0, 0), "NE": (0, 1), "SW": (1, 0), "SE": (1, 1)}
LEG_BASIS = {"NW": "X", "NE": "Z", "SW": "Z", "SE": "X"}


@dataclass(frozen=True)
class CodeConfig:
    """Code distance and number of noisy syndrome rounds (defaults to d)."""

    distance: int
    rounds: int | None = None

    def __post_init__(self):
        d = self.distance
        if d < 3 or d % 2 == 0:
            raise ValueError(f"distance must be odd and >= 3, got {d}")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")

    @property
    def num_rounds(self) -> int:
        return self.distance if self.rounds is None else self.rounds


@dataclass(frozen=True)
class Gate:
    """One two-qubit gate of the schedule. kind is 'CZ' or 'CNOT'.

    For CNOT the ancilla is the control. Qubit ids index the combined
    register: data qubits first, then ancillas.
    """

    kind: str
    ancilla: int
    data: int
    step: int
    plaquette: int
    leg: str


@dataclass
class Lattice:
    d: int
    data_coords: list[tuple[int, int]]
    anc_coords: list[tuple[float, float]]
    # per ancilla: ordered (data_index, 'X'|'Z') pairs, truncated at boundaries
    stabilizers: list[list[tuple[int, str]]]
    # two logical operators as (x_mask, z_mask) over data qubits
    logicals: list[tuple[np.ndarray, np.ndarray]]
    boundary_types: dict[str, str] = field(default_factory=dict)

    @property
    def n_data(self) -> int:
        return len(self.data_coords)

    @property
    def n_anc(self) -> int:
        return len(self.anc_coords)

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_anc

    def data_index(self, r: int, c: int) -> int:
        return r * self.d + c

    def to_json_dict(self) -> dict:
        return {
            "format": "erasesim-lattice/1",
            "distance": self.d,
            "data_qubits": [list(rc) for rc in self.data_coords],
            "ancillas": [list(rc) for rc in self.anc_coords],
            "stabilizers": [
                [[q, b] for q, b in legs] for legs in self.stabilizers
            ],
            "logicals": [
                {
                    "x_support": np.flatnonzero(x).tolist(),
                    "z_support": np.flatnonzero(z).tolist(),
                }
                for x, z in self.logicals
            ],
            "boundary_types": self.boundary_types,
        }


@dataclass
class Schedule:
    """Gate steps for one syndrome round (identical every round)."""

    gates: list[Gate]  # all gates, ordered by (step, plaquette)
    steps: list[list[Gate]]  # the same gates grouped into the 4 gate steps

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def to_json_dict(self) -> dict:
        return {
            "format": "erasesim-schedule/1",
            "steps": [
                [
                    {
                        "kind": g.kind,
                        "ancilla": g.ancilla,
                        "data": g.data,
                        "plaquette": g.plaquette,
                        "leg": g.leg,
                    }
                    for g in step
                ]
                for step in self.steps
            ],
        }


def _plaquette_centers(d: int) -> list[tuple[float, float]]:
    """Centers (r+1/2, c+1/2) of the d^2-1 plaquettes of the planar patch."""
    centers = []
    for r in range(-1, d):
        for c in range(-1, d):
            interior = 0 <= r <= d - 2 and 0 <= c <= d - 2
            north = r == -1 and 0 <= c <= d - 2 and c % 2 == 1
            south = r == d - 1 and 0 <= c <= d - 2 and c % 2 == 0
            west = c == -1 and 0 <= r <= d - 2 and r % 2 == 0
            east = c == d - 1 and 0 <= r <= d - 2 and r % 2 == 1
            if interior or north or south or west or east:
                centers.append((r + 0.5, c + 0.5))
    return centers


def _logical_operators(d: int, n_data: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # horizontal: along row 0, Z on even columns, X on odd columns
    hx = np.zeros(n_data, dtype=np.uint8)
    hz = np.zeros(n_data, dtype=np.uint8)
    for j in range(d):
        if j % 2 == 0:
            hz[j] = 1
        else:
            hx[j] = 1
    # vertical: along column 0, X on even rows, Z on odd rows
    vx = np.zeros(n_data, dtype=np.uint8)
    vz = np.zeros(n_data, dtype=np.uint8)
    for i in range(d):
        if i % 2 == 0:
            vx[i * d] = 1
        else:
            vz[i * d] = 1
    return [(hx, hz), (vx, vz)]


def build_lattice(config: CodeConfig) -> Lattice:
    """Construct the XZZX lattice for the given distance.

    Deterministic in the config. Raises ValueError on invalid distance
    (checked by CodeConfig).
    """
    d = config.distance
    data_coords = [(r, c) for r in range(d) for c in range(d)]
    centers = _plaquette_centers(d)

    stabilizers = []
    for rr, cc in centers:
        legs = []
        for leg in LEG_ORDER:
            dr, dc = LEG_OFFSETS[leg]
            qr, qc = int(rr - 0.5) + dr, int(cc - 0.5) + dc
            if 0 <= qr < d and 0 <= qc < d:
                legs.append((qr * d + qc, LEG_BASIS[leg]))
        stabilizers.append(legs)

    lattice = Lattice(
        d=d,
        data_coords=data_coords,
        anc_coords=centers,
        stabilizers=stabilizers,
        logicals=_logical_operators(d, d * d),
        boundary_types={
            "north": "horizontal-logical-endpoint",
            "south": "horizontal-logical-endpoint",
            "west": "vertical-logical-endpoint",
            "east": "vertical-logical-endpoint",
        },
    )
    _check_lattice(lattice)
    return lattice


def stabilizer_masks(lattice: Lattice) -> list[tuple[np.ndarray, np.ndarray]]:
    """Each stabilizer as (x_mask, z_mask) over data qubits."""
    out = []
    for legs in lattice.stabilizers:
        x = np.zeros(lattice.n_data, dtype=np.uint8)
        z = np.zeros(lattice.n_data, dtype=np.uint8)
        for q, b in legs:
            if b == "X":
                x[q] ^= 1
            else:
                z[q] ^= 1
        out.append((x, z))
    return out


def symplectic_product(a: tuple[np.ndarray, np.ndarray],
                       b: tuple[np.ndarray, np.ndarray]) -> int:
    """0 if the two Pauli strings commute, 1 if they anticommute."""
    ax, az = a
    bx, bz = b
    return int((np.sum(ax * bz) + np.sum(az * bx)) % 2)


def _check_lattice(lattice: Lattice) -> None:
    d = lattice.d
    if lattice.n_anc != d * d - 1:
        raise AssertionError("wrong ancilla count")
    masks = stabilizer_masks(lattice)
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if symplectic_product(masks[i], masks[j]):
                raise AssertionError(f"stabilizers {i},{j} anticommute")
    for s in masks:
        for logical in lattice.logicals:
            if symplectic_product(s, logical):
                raise AssertionError("logical anticommutes with a stabilizer")
    if symplectic_product(*lattice.logicals) != 1:
        raise AssertionError("logicals must anticommute with each other")


def build_schedule(lattice: Lattice) -> Schedule:
    """Assign every stabilizer leg to one of the four gate steps.

    Step k applies the leg in position k of the fixed NW, NE, SW, SE
    ordering; boundary plaquettes idle on their missing legs. Within a
    step each qubit participates in at most one gate because a data qubit
    is e.g. the NW leg of at most one plaquette.
    """
    n_data = lattice.n_data
    steps: list[list[Gate]] = [[], [], [], []]
    for a, (rr, cc) in enumerate(lattice.anc_coords):
        for step, leg in enumerate(LEG_ORDER):
            dr, dc = LEG_OFFSETS[leg]
            qr, qc = int(rr - 0.5) + dr, int(cc - 0.5) + dc
            if not (0 <= qr < lattice.d and 0 <= qc < lattice.d):
                continue
            kind = "CNOT" if LEG_BASIS[leg] == "X" else "CZ"
            steps[step].append(
                Gate(
                    kind=kind,
                    ancilla=n_data + a,
                    data=qr * lattice.d + qc,
                    step=step,
                    plaquette=a,
                    leg=leg,
                )
            )
    for step in steps:
        qubits = [q for g in step for q in (g.ancilla, g.data)]
        if len(qubits) != len(set(qubits)):
            raise AssertionError("qubit reused within a gate step")
    gates = [g for step in steps for g in step]
    return Schedule(gates=gates, steps=steps)
