"""Compiled scalar simulation kernels (numba backend).

Same draw-index contract as `_sim_numpy`: arc coins are unit(run_key, arc),
node thresholds are unit_open(run_key, node).  Threshold sums are evaluated
in in-neighbor CSR order, matching the segment sums of the numpy backend,
so activated sets agree bit for bit between backends.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 2.0**-53


@njit(cache=True, inline="always")
def _raw(key, index):
    z = key + (np.uint64(index) + _ONE) * _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _u01(key, index):
    return np.float64(_raw(key, index) >> _S11) * _INV53


@njit(cache=True, inline="always")
def _u01_open(key, index):
    return (np.float64(_raw(key, index) >> _S11) + 0.5) * _INV53


# -- independent cascade -------------------------------------------------------


@njit(cache=True)
def _ic_reach(n, out_indptr, arc_dst, arc_w, key, active, stack, seeds):
    top = 0
    cnt = 0
    for si in range(seeds.shape[0]):
        s = seeds[si]
        if not active[s]:
            active[s] = True
            stack[top] = s
            top += 1
            cnt += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for j in range(out_indptr[u], out_indptr[u + 1]):
            v = arc_dst[j]
            if active[v]:
                continue
            if _u01(key, j) < arc_w[j]:
                active[v] = True
                cnt += 1
                stack[top] = v
                top += 1
    return cnt


@njit(cache=True)
def ic_trial_counts(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_keys):
    counts = np.empty(run_keys.shape[0], dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    for r in range(run_keys.shape[0]):
        active[:] = False
        counts[r] = _ic_reach(n, out_indptr, arc_dst, arc_w, run_keys[r], active, stack, seeds)
    return counts


@njit(cache=True)
def ic_gain_counts(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, extra, run_keys
):
    gains = np.empty(run_keys.shape[0], dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    one = np.empty(1, dtype=np.int64)
    one[0] = extra
    for r in range(run_keys.shape[0]):
        active[:] = False
        _ic_reach(n, out_indptr, arc_dst, arc_w, run_keys[r], active, stack, seeds)
        if active[extra]:
            gains[r] = 0
        else:
            # reach(seeds) is closed under live arcs, so continuing the
            # walk from the extra node counts exactly the newly reached set
            gains[r] = _ic_reach(
                n, out_indptr, arc_dst, arc_w, run_keys[r], active, stack, one
            )
    return gains


@njit(cache=True)
def ic_activated(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_key):
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    _ic_reach(n, out_indptr, arc_dst, arc_w, run_key, active, stack, seeds)
    return active


# -- linear threshold ----------------------------------------------------------


@njit(cache=True, inline="always")
def _lt_insum(v, arc_src, arc_w, in_order, in_indptr, active):
    # in-CSR order, adding inactive contributions as +0.0, to reproduce the
    # numpy backend's segment sums exactly
    s = 0.0
    for p in range(in_indptr[v], in_indptr[v + 1]):
        a = in_order[p]
        if active[arc_src[a]]:
            s += arc_w[a]
        else:
            s += 0.0
    return s


@njit(cache=True)
def _lt_cascade(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, key, active, stack, init):
    top = 0
    cnt = 0
    for si in range(init.shape[0]):
        s = init[si]
        if not active[s]:
            active[s] = True
            stack[top] = s
            top += 1
            cnt += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for j in range(out_indptr[u], out_indptr[u + 1]):
            v = arc_dst[j]
            if active[v]:
                continue
            s = _lt_insum(v, arc_src, arc_w, in_order, in_indptr, active)
            if s >= _u01_open(key, v):
                active[v] = True
                cnt += 1
                stack[top] = v
                top += 1
    return cnt


@njit(cache=True)
def lt_trial_counts(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_keys):
    counts = np.empty(run_keys.shape[0], dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    for r in range(run_keys.shape[0]):
        active[:] = False
        counts[r] = _lt_cascade(
            n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr,
            run_keys[r], active, stack, seeds,
        )
    return counts


@njit(cache=True)
def lt_gain_counts(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, extra, run_keys
):
    gains = np.empty(run_keys.shape[0], dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    one = np.empty(1, dtype=np.int64)
    one[0] = extra
    for r in range(run_keys.shape[0]):
        active[:] = False
        _lt_cascade(
            n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr,
            run_keys[r], active, stack, seeds,
        )
        if active[extra]:
            gains[r] = 0
        else:
            gains[r] = _lt_cascade(
                n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr,
                run_keys[r], active, stack, one,
            )
    return gains


@njit(cache=True)
def lt_activated(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seeds, run_key):
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    _lt_cascade(
        n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr,
        run_key, active, stack, seeds,
    )
    return active


# -- exact live-edge enumeration ------------------------------------------------


@njit(cache=True)
def _reach_mask(n, out_indptr, arc_dst, live, active, stack, seed_mask):
    top = 0
    cnt = 0
    for v in range(n):
        if seed_mask[v]:
            active[v] = True
            stack[top] = v
            top += 1
            cnt += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for j in range(out_indptr[u], out_indptr[u + 1]):
            v = arc_dst[j]
            if live[j] and not active[v]:
                active[v] = True
                cnt += 1
                stack[top] = v
                top += 1
    return cnt


@njit(cache=True)
def ic_exact_extra(n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seed_mask):
    A = arc_w.shape[0]
    worlds = np.int64(1) << np.int64(A)
    s0 = 0
    for v in range(n):
        if seed_mask[v]:
            s0 += 1
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    live = np.zeros(A, dtype=np.bool_)
    total = 0.0
    mass = 0.0
    for world in range(worlds):
        p = 1.0
        for j in range(A):
            if (world >> j) & 1:
                live[j] = True
                p *= arc_w[j]
            else:
                live[j] = False
                p *= 1.0 - arc_w[j]
        active[:] = False
        cnt = _reach_mask(n, out_indptr, arc_dst, live, active, stack, seed_mask)
        total += p * (cnt - s0)
        mass += p
    # normalize by the enumerated probability mass (mathematically 1) so a
    # world-independent extra count comes out exactly
    return total / mass


@njit(cache=True)
def lt_exact_extra(
    n, out_indptr, arc_src, arc_dst, arc_w, in_order, in_indptr, seed_mask, none_p
):
    indeg = np.empty(n, dtype=np.int64)
    for v in range(n):
        indeg[v] = in_indptr[v + 1] - in_indptr[v]
    worlds = 1
    for v in range(n):
        worlds *= indeg[v] + 1
    s0 = 0
    for v in range(n):
        if seed_mask[v]:
            s0 += 1
    A = arc_w.shape[0]
    chosen = np.empty(n, dtype=np.int64)  # canonical arc id of live in-arc, -1 none
    live = np.zeros(A, dtype=np.bool_)
    active = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    total = 0.0
    mass = 0.0
    for world in range(worlds):
        p = 1.0
        rem = world
        for j in range(A):
            live[j] = False
        for v in range(n):
            radix = indeg[v] + 1
            digit = rem % radix
            rem //= radix
            if digit == 0:
                chosen[v] = -1
                p *= none_p[v]
            else:
                a = in_order[in_indptr[v] + digit - 1]
                chosen[v] = a
                live[a] = True
                p *= arc_w[a]
        active[:] = False
        cnt = _reach_mask(n, out_indptr, arc_dst, live, active, stack, seed_mask)
        total += p * (cnt - s0)
        mass += p
    return total / mass
