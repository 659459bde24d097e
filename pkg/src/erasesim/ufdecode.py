"""Weighted union-find decoder front end.

Clusters are seeded on defects and pre-merged across erased (weight-0)
edges; odd clusters that do not touch the boundary grow by one weight
unit per pass on every frontier edge. Logical accounting offers two
routes that must agree: a parity shortcut from spanning-forest potentials
and explicit peeling that extracts a correction edge set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import DecodingGraph


@dataclass
class DecodeResult:
    parities: np.ndarray  # uint8 per logical operator
    solid_edges: np.ndarray | None = None  # uint8 mask per edge (debug)
    n_clusters: int = 0
    trace: list[list[int]] | None = None  # solid edge ids after each pass


def _as_defect_array(graph: DecodingGraph, defects) -> np.ndarray:
    arr = np.zeros(graph.n_det + 1, np.uint8)
    if isinstance(defects, np.ndarray) and defects.dtype != np.int64 \
            and defects.ndim == 1 and len(defects) == graph.n_det:
        arr[:graph.n_det] = defects.astype(np.uint8)
        return arr
    for v in np.asarray(defects, dtype=np.int64).ravel():
        if not 0 <= v < graph.n_det:
            raise ValueError(f"defect on unknown vertex {v}")
        arr[v] ^= 1
    return arr


def _erased_mask(graph: DecodingGraph, overlay) -> np.ndarray:
    mask = np.zeros(graph.n_edges, np.uint8)
    if overlay is not None and len(overlay) > 0:
        mask[np.asarray(overlay, dtype=np.int64)] = 1
    return mask


def decode(graph: DecodingGraph, overlay, defects, want_solid: bool = False,
           trace: bool = False) -> DecodeResult:
    """Decode one trial. `overlay` is an array of erased edge ids (or
    None); `defects` is a detector bit array or a list of detector ids."""
    defect = _as_defect_array(graph, defects)
    erased = _erased_mask(graph, overlay)
    n_v = graph.n_det + 1
    if trace:
        parent, solid, passes = _uf_grow_py(
            n_v, graph.n_det, graph.eu, graph.ev, graph.weight, erased, defect)
    else:
        parent, solid = _kernels.uf_grow(
            n_v, graph.n_det, graph.eu, graph.ev, graph.weight, erased, defect)
        passes = None
    mask = _kernels.forest_parity(
        n_v, graph.n_det, graph.eu, graph.ev, solid, graph.logmask, defect)
    roots = {int(_kernels._find(parent, v)) for v in range(n_v)
             if defect[v] or parent[v] != v}
    return DecodeResult(
        parities=np.array([mask & 1, (mask >> 1) & 1], np.uint8),
        solid_edges=solid if want_solid or trace else None,
        n_clusters=len(roots),
        trace=passes,
    )


def peel_correction(graph: DecodingGraph, solid: np.ndarray, defects) -> tuple[np.ndarray, np.ndarray]:
    """Explicit correction inside the grown clusters.

    Returns (parities, correction edge ids). The correction's boundary
    (symmetric difference of edge endpoints) equals the defect set modulo
    the virtual boundary vertex; asserted here.
    """
    defect = _as_defect_array(graph, defects)
    n_v = graph.n_det + 1
    mask, correction = _kernels.peel_forest(
        n_v, graph.n_det, graph.eu, graph.ev, solid, graph.logmask, defect)
    touched = np.zeros(n_v, np.uint8)
    for e in np.flatnonzero(correction):
        touched[graph.eu[e]] ^= 1
        touched[graph.ev[e]] ^= 1
    touched[graph.n_det] = 0
    if not np.array_equal(touched[:graph.n_det], defect[:graph.n_det]):
        raise AssertionError("peeled correction does not reproduce the defects")
    return (np.array([mask & 1, (mask >> 1) & 1], np.uint8),
            np.flatnonzero(correction).astype(np.int64))


def _uf_grow_py(n_v, bnd_v, eu, ev, weight, erased, defect):
    """Pure-Python mirror of the growth kernel, recording per-pass solid
    edges. Used for debug traces and as a cross-check of the kernel."""
    parent = np.arange(n_v, dtype=np.int64)

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    size = np.ones(n_v, np.int64)
    parity = defect.astype(np.uint8).copy()
    has_bnd = np.zeros(n_v, np.uint8)
    has_bnd[bnd_v] = 1
    parity[bnd_v] = 0

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        parity[ra] ^= parity[rb]
        has_bnd[ra] |= has_bnd[rb]

    n_e = len(eu)
    growth = np.zeros(n_e, np.int64)
    solid = np.zeros(n_e, np.uint8)
    passes: list[list[int]] = []
    for e in range(n_e):
        if erased[e]:
            solid[e] = 1
            union(eu[e], ev[e])
    passes.append([int(e) for e in np.flatnonzero(solid)])

    for _ in range(n_v + 64):
        any_active = False
        newly: list[int] = []
        for e in range(n_e):
            if solid[e]:
                continue
            ru, rv = find(eu[e]), find(ev[e])
            inc = int(parity[ru] == 1 and not has_bnd[ru])
            if rv != ru:
                inc += int(parity[rv] == 1 and not has_bnd[rv])
            if inc:
                any_active = True
                growth[e] += inc
                if growth[e] >= weight[e]:
                    solid[e] = 1
                    newly.append(e)
                    union(ru, rv)
        if not any_active:
            break
        passes.append(newly)
    return parent, solid, passes
