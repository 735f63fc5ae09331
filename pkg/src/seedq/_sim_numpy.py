"""Vectorised numpy simulation kernels (fallback backend).

Random draws use the same counter-based indexing as the compiled backend:
the cascade coin for canonical arc j in a run is unit(run_key, j), the
threshold for node v is unit_open(run_key, v).  Final activated sets are
therefore identical across backends, bit for bit.

Run batches are processed in fixed-size chunks to bound peak memory; chunk
boundaries do not affect results because every run has its own stream.
"""

from __future__ import annotations

import numpy as np

from .rng import GOLDEN, _MIX1, _MIX2

_INV53 = 2.0**-53
_CHUNK_ELEMS = 4_000_000


def _unit_matrix(keys: np.ndarray, idx: np.ndarray, open_interval: bool = False) -> np.ndarray:
    """(len(keys), len(idx)) floats; row r column i is draw i of stream keys[r]."""
    z = keys[:, None] + (idx.astype(np.uint64)[None, :] + np.uint64(1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    m = (z >> np.uint64(11)).astype(np.float64)
    if open_interval:
        m += 0.5
    return m * _INV53


def _or_segments(mat: np.ndarray, indptr: np.ndarray, n: int) -> np.ndarray:
    """Per-row logical OR over CSR segments of the columns."""
    out = np.zeros((mat.shape[0], n), dtype=bool)
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    if mat.shape[1] and nonempty.any():
        out[:, nonempty] = np.logical_or.reduceat(mat, starts[nonempty], axis=1)
    return out


def _add_segments(mat: np.ndarray, indptr: np.ndarray, n: int) -> np.ndarray:
    """Per-row sum over CSR segments of the columns."""
    out = np.zeros((mat.shape[0], n))
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    if mat.shape[1] and nonempty.any():
        out[:, nonempty] = np.add.reduceat(mat, starts[nonempty], axis=1)
    return out


def _chunks(total: int, width: int):
    step = max(1, _CHUNK_ELEMS // max(width, 1))
    for a in range(0, total, step):
        yield a, min(a + step, total)


def _reach(active, live_in, src_in, in_indptr, n):
    """Closure of `active` over live arcs; live_in/src_in are in (dst,src) order."""
    while True:
        trig = active[:, src_in] & live_in
        fresh = _or_segments(trig, in_indptr, n)
        new = active | fresh
        if np.array_equal(new, active):
            return active
        active = new


# -- independent cascade -------------------------------------------------------


def ic_trial_counts(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_keys):
    A = arc_src.size
    arc_idx = np.arange(A, dtype=np.int64)
    src_in = arc_src[in_order]
    counts = np.empty(run_keys.size, dtype=np.int64)
    for a, b in _chunks(run_keys.size, A):
        live = _unit_matrix(run_keys[a:b], arc_idx) < arc_w[None, :]
        active = np.zeros((b - a, n), dtype=bool)
        active[:, seeds] = True
        active = _reach(active, live[:, in_order], src_in, in_indptr, n)
        counts[a:b] = active.sum(axis=1)
    return counts


def ic_gain_counts(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, extra, run_keys
):
    A = arc_src.size
    arc_idx = np.arange(A, dtype=np.int64)
    src_in = arc_src[in_order]
    gains = np.empty(run_keys.size, dtype=np.int64)
    for a, b in _chunks(run_keys.size, A):
        live_in = _unit_matrix(run_keys[a:b], arc_idx)[:, in_order] < arc_w[in_order][None, :]
        base = np.zeros((b - a, n), dtype=bool)
        base[:, seeds] = True
        base = _reach(base, live_in, src_in, in_indptr, n)
        ext = base.copy()
        ext[:, extra] = True
        ext = _reach(ext, live_in, src_in, in_indptr, n)
        gains[a:b] = ext.sum(axis=1) - base.sum(axis=1)
    return gains


def ic_activated(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_key):
    keys = np.array([run_key], dtype=np.uint64)
    A = arc_src.size
    live = _unit_matrix(keys, np.arange(A, dtype=np.int64)) < arc_w[None, :]
    active = np.zeros((1, n), dtype=bool)
    active[:, seeds] = True
    active = _reach(active, live[:, in_order], arc_src[in_order], in_indptr, n)
    return active[0]


# -- linear threshold ----------------------------------------------------------


def _lt_fixpoint(active, thresholds, w_in, src_in, in_indptr, n):
    while True:
        contrib = active[:, src_in] * w_in[None, :]
        sums = _add_segments(contrib, in_indptr, n)
        new = active | (sums >= thresholds)
        if np.array_equal(new, active):
            return active
        active = new


def lt_trial_counts(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_keys):
    w_in = arc_w[in_order]
    src_in = arc_src[in_order]
    node_idx = np.arange(n, dtype=np.int64)
    counts = np.empty(run_keys.size, dtype=np.int64)
    for a, b in _chunks(run_keys.size, max(arc_src.size, n)):
        thresholds = _unit_matrix(run_keys[a:b], node_idx, open_interval=True)
        active = np.zeros((b - a, n), dtype=bool)
        active[:, seeds] = True
        active = _lt_fixpoint(active, thresholds, w_in, src_in, in_indptr, n)
        counts[a:b] = active.sum(axis=1)
    return counts


def lt_gain_counts(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, extra, run_keys
):
    w_in = arc_w[in_order]
    src_in = arc_src[in_order]
    node_idx = np.arange(n, dtype=np.int64)
    gains = np.empty(run_keys.size, dtype=np.int64)
    for a, b in _chunks(run_keys.size, max(arc_src.size, n)):
        thresholds = _unit_matrix(run_keys[a:b], node_idx, open_interval=True)
        base = np.zeros((b - a, n), dtype=bool)
        base[:, seeds] = True
        base = _lt_fixpoint(base, thresholds, w_in, src_in, in_indptr, n)
        ext = base.copy()
        ext[:, extra] = True
        ext = _lt_fixpoint(ext, thresholds, w_in, src_in, in_indptr, n)
        gains[a:b] = ext.sum(axis=1) - base.sum(axis=1)
    return gains


def lt_activated(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_key):
    keys = np.array([run_key], dtype=np.uint64)
    thresholds = _unit_matrix(keys, np.arange(n, dtype=np.int64), open_interval=True)
    active = np.zeros((1, n), dtype=bool)
    active[:, seeds] = True
    active = _lt_fixpoint(
        active, thresholds, arc_w[in_order], arc_src[in_order], in_indptr, n
    )
    return active[0]


# -- exact live-edge enumeration ------------------------------------------------


def ic_exact_extra(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seed_mask):
    """Expected extra activations over all 2^A arc worlds.

    Normalized by the enumerated probability mass (mathematically 1) so a
    world-independent extra count comes out exactly.
    """
    A = arc_src.size
    worlds = 1 << A
    s0 = int(seed_mask.sum())
    src_in = arc_src[in_order]
    bits = np.arange(A, dtype=np.uint64)
    total = 0.0
    mass = 0.0
    for a, b in _chunks(worlds, max(A, 1)):
        ids = np.arange(a, b, dtype=np.uint64)
        live = ((ids[:, None] >> bits[None, :]) & np.uint64(1)).astype(bool)
        probs = np.prod(np.where(live, arc_w[None, :], 1.0 - arc_w[None, :]), axis=1)
        active = np.broadcast_to(seed_mask, (b - a, n)).copy()
        active = _reach(active, live[:, in_order], src_in, in_indptr, n)
        total += float(np.sum(probs * (active.sum(axis=1) - s0)))
        mass += float(np.sum(probs))
    return total / mass


def lt_exact_extra(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seed_mask, none_p
):
    """Enumerate each node's live in-arc choice (or none) and sum spreads.

    Node v picks its in-arc at position d-1 of its in-list with probability
    arc_w of that arc, or no live in-arc with probability none_p[v].
    """
    indeg = np.diff(in_indptr)
    radix = indeg + 1
    strides = np.concatenate([[1], np.cumprod(radix[:-1])]).astype(np.int64)
    worlds = int(np.prod(radix))
    s0 = int(seed_mask.sum())
    w_in = arc_w[in_order]
    src_in = arc_src[in_order]
    A = arc_src.size
    total = 0.0
    mass = 0.0
    for a, b in _chunks(worlds, max(A, n)):
        ids = np.arange(a, b, dtype=np.int64)
        digits = (ids[:, None] // strides[None, :]) % radix[None, :]
        valid = digits > 0
        pos = in_indptr[:-1][None, :] + digits - 1  # in-order arc position per node
        pos_safe = np.where(valid, pos, 0)
        probs = np.prod(np.where(valid, w_in[pos_safe], none_p[None, :]), axis=1)
        # arc (in in-order position p, destination v) is live iff v chose p
        chosen_pos = np.where(valid, pos, -1)
        live_in = chosen_pos[:, arc_dst[in_order]] == np.arange(A)[None, :]
        active = np.broadcast_to(seed_mask, (b - a, n)).copy()
        active = _reach(active, live_in, src_in, in_indptr, n)
        total += float(np.sum(probs * (active.sum(axis=1) - s0)))
        mass += float(np.sum(probs))
    return total / mass
