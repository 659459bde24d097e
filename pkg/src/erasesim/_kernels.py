"""Numba kernels: weighted union-find growth, forest bookkeeping, peeling,
and the Monte Carlo trial loop.

All kernels operate on flat arrays describing the decoding graph (eu, ev,
weight, logmask) with the virtual boundary as vertex index n_det. They are
compiled once per process and shared by the decoder front end and the
fast sampler.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        nxt = parent[v]
        parent[v] = root
        v = nxt
    return root


@njit(cache=True, nogil=True)
def _union(parent, size, parity, has_bnd, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    parity[ra] ^= parity[rb]
    has_bnd[ra] |= has_bnd[rb]
    return ra


@njit(cache=True, nogil=True)
def uf_grow(n_v, bnd_v, eu, ev, weight, erased, defect):
    """Grow odd clusters until every defect is in an even or boundary-
    connected cluster. Returns (parent, solid edge mask).

    Erased edges start solid (weight 0). Each pass adds one weight unit
    per active (odd, boundary-free) endpoint cluster to every incident
    non-solid edge; an edge solidifies when accumulated growth reaches
    its weight, merging the endpoint clusters.
    """
    n_e = len(eu)
    parent = np.arange(n_v, dtype=np.int32)
    size = np.ones(n_v, dtype=np.int32)
    parity = np.zeros(n_v, dtype=np.uint8)
    has_bnd = np.zeros(n_v, dtype=np.uint8)
    has_bnd[bnd_v] = 1
    for v in range(n_v):
        if defect[v]:
            parity[v] = 1
    growth = np.zeros(n_e, dtype=np.int32)
    solid = np.zeros(n_e, dtype=np.uint8)

    for e in range(n_e):
        if erased[e]:
            solid[e] = 1
            _union(parent, size, parity, has_bnd, eu[e], ev[e])

    max_passes = n_v + 64  # safety; growth terminates far sooner
    for _ in range(max_passes):
        any_active = False
        for e in range(n_e):
            if solid[e]:
                continue
            ru = _find(parent, eu[e])
            rv = _find(parent, ev[e])
            inc = 0
            if parity[ru] == 1 and has_bnd[ru] == 0:
                inc += 1
            if rv != ru and parity[rv] == 1 and has_bnd[rv] == 0:
                inc += 1
            if inc > 0:
                any_active = True
                growth[e] += inc
                if growth[e] >= weight[e]:
                    solid[e] = 1
                    _union(parent, size, parity, has_bnd, ru, rv)
        if not any_active:
            break
    return parent, solid


@njit(cache=True, nogil=True)
def build_forest(n_v, bnd_v, eu, ev, solid):
    """BFS spanning forest of the solid subgraph, boundary vertex first.

    Returns (order, parent_vertex, parent_edge) with parent_edge = -1 at
    roots; `order` lists vertices in BFS visitation order.
    """
    n_e = len(eu)
    deg = np.zeros(n_v, dtype=np.int32)
    for e in range(n_e):
        if solid[e]:
            deg[eu[e]] += 1
            deg[ev[e]] += 1
    ptr = np.zeros(n_v + 1, dtype=np.int32)
    for v in range(n_v):
        ptr[v + 1] = ptr[v] + deg[v]
    adj_e = np.empty(ptr[n_v], dtype=np.int32)
    fill = ptr[:-1].copy()
    for e in range(n_e):
        if solid[e]:
            adj_e[fill[eu[e]]] = e
            fill[eu[e]] += 1
            adj_e[fill[ev[e]]] = e
            fill[ev[e]] += 1

    visited = np.zeros(n_v, dtype=np.uint8)
    order = np.empty(n_v, dtype=np.int32)
    parent_vertex = np.full(n_v, -1, dtype=np.int32)
    parent_edge = np.full(n_v, -1, dtype=np.int32)
    queue = np.empty(n_v, dtype=np.int32)
    n_order = 0
    for start_i in range(n_v + 1):
        start = bnd_v if start_i == 0 else start_i - 1
        if visited[start]:
            continue
        visited[start] = 1
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            order[n_order] = u
            n_order += 1
            for k in range(ptr[u], ptr[u + 1]):
                e = adj_e[k]
                w = ev[e] if eu[e] == u else eu[e]
                if not visited[w]:
                    visited[w] = 1
                    parent_vertex[w] = u
                    parent_edge[w] = e
                    queue[tail] = w
                    tail += 1
    return order, parent_vertex, parent_edge


@njit(cache=True, nogil=True)
def forest_parity(n_v, bnd_v, eu, ev, solid, logmask, defect):
    """Correction parity per logical via tree potentials (no explicit
    correction): XOR over defects of the path mask to their tree root."""
    order, parent_vertex, parent_edge = build_forest(n_v, bnd_v, eu, ev, solid)
    pot = np.zeros(n_v, dtype=np.uint8)
    for i in range(n_v):
        v = order[i]
        e = parent_edge[v]
        if e >= 0:
            pot[v] = pot[parent_vertex[v]] ^ logmask[e]
    corr = np.uint8(0)
    for v in range(n_v):
        if defect[v]:
            corr ^= pot[v]
    return corr


@njit(cache=True, nogil=True)
def peel_forest(n_v, bnd_v, eu, ev, solid, logmask, defect):
    """Explicit peeling: extract a correction edge set whose boundary is
    the defect set (mod the virtual boundary vertex).

    Returns (parity, correction edge mask). Leaves of the spanning forest
    are peeled inward; a defect at a leaf selects its parent edge.
    """
    order, parent_vertex, parent_edge = build_forest(n_v, bnd_v, eu, ev, solid)
    work = np.zeros(n_v, dtype=np.uint8)
    for v in range(n_v):
        if defect[v]:
            work[v] = 1
    work[bnd_v] = 0
    correction = np.zeros(len(eu), dtype=np.uint8)
    corr = np.uint8(0)
    for i in range(n_v - 1, -1, -1):
        v = order[i]
        e = parent_edge[v]
        if e < 0:
            continue
        if work[v]:
            work[v] = 0
            correction[e] = 1
            corr ^= logmask[e]
            p = parent_vertex[v]
            if p != bnd_v:
                work[p] ^= 1
    return corr, correction


@njit(cache=True, nogil=True)
def decode_trial(n_det, eu, ev, weight, logmask, erased, defect):
    """Full per-trial decode: grow clusters, return the shortcut parity."""
    n_v = n_det + 1
    dshort = np.zeros(n_v, dtype=np.uint8)
    dshort[:n_det] = defect
    parent, solid = uf_grow(n_v, n_det, eu, ev, weight, erased, dshort)
    return forest_parity(n_v, n_det, eu, ev, solid, logmask, dshort)


@njit(cache=True, nogil=True)
def agreement_chunk(seed, n_trials,
                    p_e, p_p, p_m, biased, cum_pay,
                    rounds, n_gates, n_anc,
                    pay_defs, pay_ndefs, pay_mask,
                    n_det, eu, ev, weight, logmask,
                    site_edge_ptr, site_edge_ids):
    """Count sampled trials where the parity shortcut and explicit
    peeling disagree. Shares the sampling logic of run_chunk."""
    np.random.seed(seed)
    n_e = len(eu)
    n_v = n_det + 1
    disagreements = 0
    defect = np.zeros(n_v, dtype=np.uint8)
    erased = np.zeros(n_e, dtype=np.uint8)
    for _ in range(n_trials):
        defect[:] = 0
        erased[:] = 0
        for t in range(rounds):
            base = t * n_anc
            for g in range(n_gates):
                u = np.random.random()
                payload = 0
                is_erasure = False
                if biased:
                    if u < cum_pay[g, 14]:
                        for k in range(15):
                            if u < cum_pay[g, k]:
                                payload = k + 1
                                break
                else:
                    if u < p_e:
                        is_erasure = True
                        payload = np.random.randint(0, 16)
                    elif u < p_e + p_p:
                        payload = 1 + np.random.randint(0, 15)
                if payload > 0:
                    k = payload - 1
                    for j in range(pay_ndefs[g, k]):
                        defect[base + pay_defs[g, k, j]] ^= 1
                if is_erasure:
                    site = t * n_gates + g
                    for j in range(site_edge_ptr[site], site_edge_ptr[site + 1]):
                        erased[site_edge_ids[j]] = 1
            if p_m > 0.0:
                for a in range(n_anc):
                    flip = False
                    if np.random.random() < p_m:
                        flip = not flip
                    if np.random.random() < p_m:
                        flip = not flip
                    if flip:
                        defect[base + a] ^= 1
                        defect[base + n_anc + a] ^= 1
        parent, solid = uf_grow(n_v, n_det, eu, ev, weight, erased, defect)
        corr_a = forest_parity(n_v, n_det, eu, ev, solid, logmask, defect)
        corr_b, _ = peel_forest(n_v, n_det, eu, ev, solid, logmask, defect)
        if corr_a != corr_b:
            disagreements += 1
    return disagreements


@njit(cache=True, nogil=True)
def run_chunk(seed, n_trials,
              # noise parameters
              p_e, p_p, p_m, biased, cum_pay,
              # circuit shape
              rounds, n_gates, n_anc,
              # payload tables (relative detector ids, -1 padded)
              pay_defs, pay_ndefs, pay_mask,
              # graph arrays
              n_det, eu, ev, weight, logmask,
              site_edge_ptr, site_edge_ids,
              # which logical bits count as failures
              track_mask):
    """Sample and decode n_trials trials; returns (trials, failures).

    Sampling uses the precomputed payload signature tables, which the
    tests verify against the Pauli-frame reference simulator. The chunk
    is the unit of reproducibility: results depend only on (seed,
    n_trials) and the tables.
    """
    np.random.seed(seed)
    n_e = len(eu)
    n_v = n_det + 1
    failures = 0
    defect = np.zeros(n_v, dtype=np.uint8)
    erased = np.zeros(n_e, dtype=np.uint8)

    for _ in range(n_trials):
        defect[:] = 0
        erased[:] = 0
        true_mask = np.uint8(0)
        for t in range(rounds):
            base = t * n_anc
            for g in range(n_gates):
                u = np.random.random()
                payload = 0
                is_erasure = False
                if biased:
                    if u < cum_pay[g, 14]:
                        for k in range(15):
                            if u < cum_pay[g, k]:
                                payload = k + 1
                                break
                else:
                    if u < p_e:
                        is_erasure = True
                        payload = np.random.randint(0, 16)
                    elif u < p_e + p_p:
                        payload = 1 + np.random.randint(0, 15)
                if payload > 0:
                    k = payload - 1
                    for j in range(pay_ndefs[g, k]):
                        defect[base + pay_defs[g, k, j]] ^= 1
                    true_mask ^= pay_mask[g, k]
                if is_erasure:
                    site = t * n_gates + g
                    for j in range(site_edge_ptr[site], site_edge_ptr[site + 1]):
                        erased[site_edge_ids[j]] = 1
            if p_m > 0.0:
                for a in range(n_anc):
                    flip = False
                    if np.random.random() < p_m:
                        flip = not flip
                    if np.random.random() < p_m:
                        flip = not flip
                    if flip:
                        defect[base + a] ^= 1
                        defect[base + n_anc + a] ^= 1
        parent, solid = uf_grow(n_v, n_det, eu, ev, weight, erased, defect)
        corr = forest_parity(n_v, n_det, eu, ev, solid, logmask, defect)
        if (corr ^ true_mask) & track_mask:
            failures += 1
    return n_trials, failures
