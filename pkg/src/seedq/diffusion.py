"""Cascade simulators, Monte-Carlo spread estimation, and exact oracles.

Two models: independent cascade (``ic``) where a newly activated node gets
one chance per out-arc to activate the endpoint with probability equal to
the arc weight, and linear threshold (``lt``) where a node activates once
the weights of its activated in-neighbors reach a per-trial uniform
threshold.  Undirected edges act as two independent arcs.

Exact spreads enumerate the equivalent live-edge worlds and are only
feasible on tiny instances; they are the oracle against which the
Monte-Carlo estimators are tested.

Run r of any estimate draws from the stream raw_at(rng_seed, r), so results
are reproducible bit for bit regardless of backend or scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .backend import kernels
from .graph import Graph

MAX_EXACT_ARCS = 20  # independent cascade enumerates 2^arcs worlds
MAX_EXACT_WORLDS = 1 << 20  # linear threshold enumerates prod(indeg+1) worlds

_LT_OVERLOAD_TOL = 1e-9


@dataclass(frozen=True)
class DiffusionModel:
    """Model kind plus the linear-threshold weight-overload policy."""

    kind: str  # "ic" | "lt"
    renormalize: bool = False  # lt: scale in-weights of nodes whose sum exceeds 1

    def __post_init__(self):
        if self.kind not in ("ic", "lt"):
            raise ValueError("diffusion kind must be 'ic' or 'lt', got %r" % (self.kind,))


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    stderr: float
    runs: int


def _seed_array(g: Graph, seeds) -> np.ndarray:
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= g.n):
        raise ValueError("seed id outside graph with n=%d" % g.n)
    return arr


def _in_weight_sums(g: Graph, arc_w: np.ndarray) -> np.ndarray:
    """Per-node sum of incoming arc weights, robust to empty segments."""
    out = np.zeros(g.n)
    starts = g.in_indptr[:-1]
    nonempty = g.in_indptr[1:] > starts
    if arc_w.size and nonempty.any():
        out[nonempty] = np.add.reduceat(arc_w[g.in_order], starts[nonempty])
    return out


def _effective_weights(g: Graph, model: DiffusionModel) -> np.ndarray:
    """Canonical arc weights; lt in-weights rescaled or rejected on overload."""
    if model.kind == "ic":
        return g.arc_w
    sums = _in_weight_sums(g, g.arc_w)
    if model.renormalize:
        scale = np.maximum(sums, 1.0)
        return g.arc_w / scale[g.arc_dst]
    if np.any(sums > 1.0 + _LT_OVERLOAD_TOL):
        v = int(np.argmax(sums))
        raise ValueError(
            "lt in-weights of node %d sum to %.6g > 1; set renormalize" % (v, sums[v])
        )
    return g.arc_w


def _lt_none_p(g: Graph, w_eff: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - _in_weight_sums(g, w_eff))


def _graph_args(g: Graph, w_eff: np.ndarray):
    return (g.n, g.out_indptr, g.arc_src, g.arc_dst, w_eff, g.in_order, g.in_indptr)


def simulate_once(g: Graph, model: DiffusionModel, seeds, rng_seed: int) -> set[int]:
    """One cascade trial; returns the activated node set (a superset of seeds).

    Equals run 0 of estimate_spread with the same rng_seed.
    """
    arr = _seed_array(g, seeds)
    if arr.size == 0:
        raise ValueError("seeds must be nonempty")
    w_eff = _effective_weights(g, model)
    key = np.uint64(rng.raw_at(rng_seed, 0))
    kern = kernels()
    fn = kern.ic_activated if model.kind == "ic" else kern.lt_activated
    active = fn(*_graph_args(g, w_eff), arr, key)
    return {int(v) for v in np.flatnonzero(active)}


def estimate_spread(g: Graph, model: DiffusionModel, seeds, runs: int, rng_seed: int) -> SpreadEstimate:
    """Monte-Carlo expected spread over `runs` independent trials."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    arr = _seed_array(g, seeds)
    w_eff = _effective_weights(g, model)
    keys = rng.run_keys(rng_seed, runs)
    kern = kernels()
    fn = kern.ic_trial_counts if model.kind == "ic" else kern.lt_trial_counts
    counts = fn(*_graph_args(g, w_eff), arr, keys)
    s0 = int(arr.size)
    mean = s0 + float(np.sum(counts - s0)) / runs
    stderr = float(np.std(counts, ddof=1) / np.sqrt(runs)) if runs > 1 else 0.0
    return SpreadEstimate(mean=mean, stderr=stderr, runs=runs)


def marginal_gain(g: Graph, model: DiffusionModel, seeds, v: int, runs: int, rng_seed: int) -> float:
    """Estimated spread(seeds + v) - spread(seeds), paired per-run draws.

    Sharing the cascade randomness between the two terms makes every per-run
    difference non-negative, which cuts the estimator variance.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    arr = _seed_array(g, seeds)
    if not (0 <= v < g.n):
        raise ValueError("node %d outside graph" % v)
    if v in arr:
        raise ValueError("node %d already a seed" % v)
    w_eff = _effective_weights(g, model)
    keys = rng.run_keys(rng_seed, runs)
    kern = kernels()
    fn = kern.ic_gain_counts if model.kind == "ic" else kern.lt_gain_counts
    gains = fn(*_graph_args(g, w_eff), arr, v, keys)
    return float(np.sum(gains)) / runs


def exact_spread(g: Graph, model: DiffusionModel, seeds) -> float:
    """Exact expected spread by live-edge world enumeration (tiny graphs only).

    Computed as |seeds| plus the exactly-enumerated expected extra
    activations, so deterministic instances come out exact.
    """
    arr = _seed_array(g, seeds)
    seed_mask = np.zeros(g.n, dtype=bool)
    seed_mask[arr] = True
    kern = kernels()
    if model.kind == "ic":
        if g.num_arcs > MAX_EXACT_ARCS:
            raise ValueError(
                "exact ic spread enumerates 2^%d worlds; arc limit is %d"
                % (g.num_arcs, MAX_EXACT_ARCS)
            )
        extra = kern.ic_exact_extra(*_graph_args(g, g.arc_w), seed_mask)
        return float(arr.size) + float(extra)
    w_eff = _effective_weights(g, model)
    worlds = 1
    for d in np.diff(g.in_indptr):
        worlds *= int(d) + 1
        if worlds > MAX_EXACT_WORLDS:
            raise ValueError(
                "exact lt spread needs prod(indeg+1) <= %d worlds" % MAX_EXACT_WORLDS
            )
    none_p = _lt_none_p(g, w_eff)
    extra = kern.lt_exact_extra(*_graph_args(g, w_eff), seed_mask, none_p)
    return float(arr.size) + float(extra)


def exact_marginal_gain(g: Graph, model: DiffusionModel, seeds, v: int) -> float:
    """exact_spread(seeds + v) - exact_spread(seeds)."""
    arr = _seed_array(g, seeds)
    if v in arr:
        raise ValueError("node %d already a seed" % v)
    return exact_spread(g, model, list(arr) + [v]) - exact_spread(g, model, arr)
