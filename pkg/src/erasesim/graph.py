"""Space-time decoding graph built by exhaustive single-fault injection.

Every sampled two-qubit Pauli payload decomposes into single-qubit X/Z
fault primitives (X and Z on each of the gate's two qubits, applied right
after the gate). Each primitive flips at most two detectors, so the
primitives are the graph's error mechanisms; a payload's detector
signature is the XOR of its primitives' signatures. (A payload itself can
flip up to four detectors, e.g. Y on a data qubit, which is why payloads
are decomposed rather than kept as hyperedges.)

Primitives are enumerated once at a reference round and translated in
time: a fault injected during round t only fires detectors in rounds t
and t+1, so the signature is time-covariant. Init/measurement flips add
time-like mechanisms between consecutive detectors of one ancilla.

Edge weights follow w = max(1, round(-ln p')) where p' is the total
probability of the mechanisms on the edge. Weighting by the total rather
than the single largest mechanism matters: with a uniform Pauli channel
every mechanism has the same probability, so per-mechanism weights make
all gate edges identical and the decoder resolves the resulting ties
arbitrarily — which turns some single hook faults near the space-time
boundary into deterministic logical failures. The mechanism-count
multiplicity encoded in the total breaks those ties toward the more
probable class. Heralded erasures force the affected edges to weight 0
via a per-trial overlay.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .frames import injected_trial
from .noise import BIASED, ERASURE, NoiseConfig, biased_pauli_probs
from .xzzx import CodeConfig, Lattice, Schedule, build_lattice, build_schedule

logger = logging.getLogger(__name__)

_PAULI_HAS_X = (False, True, True, False)  # I X Y Z
_PAULI_HAS_Z = (False, False, True, True)


@dataclass(frozen=True)
class Primitive:
    """Single-qubit fault right after a gate of the reference round.

    rel_defects are (dt, ancilla) with dt in {0, 1}; mask has one logical-
    crossing bit per logical operator.
    """

    gate: int
    slot: int  # 0 = ancilla, 1 = data
    pauli: str  # 'X' or 'Z'
    rel_defects: tuple[tuple[int, int], ...]
    mask: int


@dataclass(frozen=True)
class PrimitiveTable:
    d: int
    n_anc: int
    n_gates: int
    primitives: dict[tuple[int, int, str], Primitive]

    def payload_signature(self, gate: int, payload: int) -> tuple[tuple[tuple[int, int], ...], int]:
        """(relative defects, logical mask) of a 1..15 two-qubit payload."""
        defects: set[tuple[int, int]] = set()
        mask = 0
        for slot, pauli in ((0, payload // 4), (1, payload % 4)):
            for name, present in (("X", _PAULI_HAS_X[pauli]), ("Z", _PAULI_HAS_Z[pauli])):
                if not present:
                    continue
                prim = self.primitives[(gate, slot, name)]
                defects.symmetric_difference_update(prim.rel_defects)
                mask ^= prim.mask
        return tuple(sorted(defects)), mask


@lru_cache(maxsize=None)
def _cached_code(d: int) -> tuple[Lattice, Schedule]:
    lattice = build_lattice(CodeConfig(d))
    return lattice, build_schedule(lattice)


@lru_cache(maxsize=None)
def primitive_table(d: int) -> PrimitiveTable:
    """Enumerate all single-qubit fault primitives for distance d."""
    lattice, schedule = _cached_code(d)
    n_anc = lattice.n_anc
    prims: dict[tuple[int, int, str], Primitive] = {}
    # two noisy rounds are enough: injection in round 0 fires detectors in
    # rounds 0 and 1 only (verified exhaustively in the tests)
    for g in range(schedule.n_gates):
        for slot, pauli, code in ((0, "X", (1, 0)), (0, "Z", (3, 0)),
                                  (1, "X", (0, 1)), (1, "Z", (0, 3))):
            trial = injected_trial(lattice, schedule, 2,
                                   gate_injections=[(0, g, code[0], code[1])])
            defs = tuple((int(t), int(a)) for t, a in np.argwhere(trial.detectors))
            if any(t > 1 for t, _ in defs):
                raise AssertionError("primitive fired a detector beyond round t+1")
            if len(defs) > 2:
                raise AssertionError(
                    f"primitive gate={g} slot={slot} {pauli} fired {len(defs)} detectors")
            mask = int(trial.true_parities[0]) | (int(trial.true_parities[1]) << 1)
            if not defs and mask:
                raise AssertionError("undetectable single fault with logical action")
            prims[(g, slot, pauli)] = Primitive(g, slot, pauli, defs, mask)
    return PrimitiveTable(d=d, n_anc=n_anc, n_gates=schedule.n_gates, primitives=prims)


@dataclass
class DecodingGraph:
    d: int
    rounds: int
    n_anc: int
    n_gates: int
    n_det: int  # detector vertices; the virtual boundary vertex is index n_det
    eu: np.ndarray  # int32 per edge
    ev: np.ndarray  # int32 per edge, n_det = boundary
    weight: np.ndarray  # int32 >= 1
    pprime: np.ndarray  # float64
    logmask: np.ndarray  # uint8, 2 bits
    mechanisms: list[list[tuple[str, float]]]
    site_edge_ptr: np.ndarray  # CSR over sites (round * n_gates + gate)
    site_edge_ids: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.eu)

    @property
    def boundary(self) -> int:
        return self.n_det

    def detector_index(self, t: int, a: int) -> int:
        return t * self.n_anc + a

    def site_edges(self, t: int, g: int) -> np.ndarray:
        s = t * self.n_gates + g
        return self.site_edge_ids[self.site_edge_ptr[s]:self.site_edge_ptr[s + 1]]

    def to_json_dict(self) -> dict:
        verts = [{"id": v, "round": v // self.n_anc, "ancilla": v % self.n_anc}
                 for v in range(self.n_det)]
        edges = [
            {
                "u": int(self.eu[e]),
                "v": "boundary" if self.ev[e] == self.n_det else int(self.ev[e]),
                "weight": int(self.weight[e]),
                "p_prime": float(self.pprime[e]),
                "logical_mask": int(self.logmask[e]),
                "mechanisms": [{"source": s, "p": p} for s, p in self.mechanisms[e]],
            }
            for e in range(self.n_edges)
        ]
        return {"format": "erasesim-graph/1", "distance": self.d,
                "rounds": self.rounds, "vertices": verts, "edges": edges}


def _edge_weight(p_prime: float) -> int:
    # round(-ln p'), clamped to >= 1 so only heralded erasures reach 0
    return max(1, int(math.floor(-math.log(p_prime) + 0.5)))


def build_graph(lattice: Lattice, schedule: Schedule, cfg: NoiseConfig,
                rounds: int | None = None) -> DecodingGraph:
    """Build the weighted space-time decoding graph for a configuration.

    Pure function of (lattice, schedule, cfg, rounds); per-trial erasures
    are applied separately via overlay_erasures.
    """
    if cfg.p <= 0.0:
        raise ValueError("edge weights are undefined at p = 0")
    d = lattice.d
    if rounds is None:
        rounds = d
    table = primitive_table(d)
    n_anc, n_gates = table.n_anc, table.n_gates
    n_det = (rounds + 1) * n_anc

    if cfg.mode == ERASURE:
        # each payload occurs from the Pauli channel or as an erasure
        # replacement pattern (15 patterns at p_e/16 each)
        payload_prob = {g: np.full(16, cfg.p_p / 15 + cfg.p_e / 16)
                        for g in range(n_gates)}
    else:
        payload_prob = {g: biased_pauli_probs(cfg.p, cfg.eta, schedule.gates[g].kind)
                        for g in range(n_gates)}

    edge_id: dict[tuple[int, int], int] = {}
    eu: list[int] = []
    ev: list[int] = []
    pprime: list[float] = []
    mechanisms: list[list[tuple[str, float]]] = []
    mask_totals: list[dict[int, float]] = []  # per edge: mask -> summed prob

    def add_mechanism(defects: tuple[int, ...], mask: int, label: str, prob: float) -> int | None:
        if prob <= 0.0 or not defects:
            return None
        if len(defects) == 1:
            key = (defects[0], n_det)
        else:
            key = (min(defects), max(defects))
        e = edge_id.get(key)
        if e is None:
            e = len(eu)
            edge_id[key] = e
            eu.append(key[0])
            ev.append(key[1])
            pprime.append(prob)
            mask_totals.append({mask: prob})
            mechanisms.append([(label, prob)])
        else:
            mechanisms[e].append((label, prob))
            pprime[e] += prob
            mask_totals[e][mask] = mask_totals[e].get(mask, 0.0) + prob
        return e

    site_edges: list[set[int]] = [set() for _ in range(rounds * n_gates)]
    for t in range(rounds):
        for g in range(n_gates):
            site = t * n_gates + g
            probs = payload_prob[g]
            for payload in range(1, 16):
                q = float(probs[payload])
                if q <= 0.0:
                    continue
                rel_defects, mask = table.payload_signature(g, payload)
                if len(rel_defects) <= 2:
                    # graphlike payload: keep it as one edge so that e.g. a
                    # round-0 hook whose net signature is a lone boundary
                    # defect gets a weight-1-path explanation in the right
                    # logical class (decomposing it leaves only degenerate
                    # two-edge paths and a tie the decoder can lose)
                    defects = tuple(sorted((t + dt) * n_anc + a
                                           for dt, a in rel_defects))
                    e = add_mechanism(defects, mask,
                                      f"gate t={t} g={g} payload={payload}", q)
                    if e is not None:
                        site_edges[site].add(e)
                    continue
                # hyperedge: decompose onto this payload's primitive edges;
                # an edge appearing twice cancels (the payload acts
                # trivially on it)
                edge_counts: dict[tuple[tuple[tuple[int, int], ...], int], int] = {}
                for slot, pauli in ((0, payload // 4), (1, payload % 4)):
                    for name, present in (("X", _PAULI_HAS_X[pauli]),
                                          ("Z", _PAULI_HAS_Z[pauli])):
                        if not present:
                            continue
                        prim = table.primitives[(g, slot, name)]
                        if not prim.rel_defects:
                            continue
                        k = (prim.rel_defects, prim.mask)
                        edge_counts[k] = edge_counts.get(k, 0) ^ 1
                for (rel, mask_p), odd in edge_counts.items():
                    if not odd:
                        continue
                    defects = tuple(sorted((t + dt) * n_anc + a for dt, a in rel))
                    e = add_mechanism(defects, mask_p,
                                      f"gate t={t} g={g} payload={payload}", q)
                    if e is not None:
                        site_edges[site].add(e)

    if cfg.p_m > 0.0:
        for t in range(rounds):
            for a in range(n_anc):
                defects = (t * n_anc + a, (t + 1) * n_anc + a)
                add_mechanism(defects, 0, f"prep t={t} a={a}", cfg.p_m)
                add_mechanism(defects, 0, f"meas t={t} a={a}", cfg.p_m)

    # each edge's logical mask: the class carrying the larger share of the
    # edge's total mechanism probability (the per-edge ML choice)
    logmask: list[int] = []
    for key, totals in zip(edge_id, mask_totals):
        if len(totals) > 1:
            logger.warning(
                "edge %s: mechanisms disagree on logical mask; "
                "keeping the more probable class", key)
        logmask.append(max(totals, key=lambda m: (totals[m], -m)))

    weight = np.array([_edge_weight(p) for p in pprime], np.int32)
    ptr = np.zeros(rounds * n_gates + 1, np.int64)
    ids: list[int] = []
    for s, es in enumerate(site_edges):
        ids.extend(sorted(es))
        ptr[s + 1] = len(ids)
    return DecodingGraph(
        d=d, rounds=rounds, n_anc=n_anc, n_gates=n_gates, n_det=n_det,
        eu=np.array(eu, np.int32), ev=np.array(ev, np.int32),
        weight=weight, pprime=np.array(pprime), logmask=np.array(logmask, np.uint8),
        mechanisms=mechanisms, site_edge_ptr=ptr,
        site_edge_ids=np.array(ids, np.int64),
    )


def overlay_erasures(graph: DecodingGraph, record: list[tuple[int, int]]) -> np.ndarray:
    """Edge ids forced to weight 0 by one trial's heralded erasures.

    Duplicate locations are idempotent; unknown locations raise.
    """
    out: set[int] = set()
    for t, g in record:
        if not (0 <= t < graph.rounds and 0 <= g < graph.n_gates):
            raise ValueError(f"unknown gate location ({t}, {g})")
        out.update(int(e) for e in graph.site_edges(t, g))
    return np.array(sorted(out), np.int64)
