"""Seed-set construction strategies and the rank-stability diagnostics.

The product strategy embeds once under an empty seed set and takes the k
best-scored nodes in one shot.  The iterative variant re-embeds after every
insertion (the classical hill climb it is measured against), and the
stability report quantifies how little the score order moves between the
two.  CELF lazy greedy over Monte-Carlo or exact spreads is the quality
oracle; random selection is the floor.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .diffusion import DiffusionModel, estimate_spread, exact_spread, marginal_gain
from .embedding import QNetParams, embed, q_values
from .graph import Graph, average_degree
from .rng import Stream, substream

METHODS = ("topk", "iterative", "celf", "random")


@dataclass
class SeedSet:
    """Ordered selected seeds with their selection-time scores."""

    nodes: list[int]
    method: str
    q_values: list[float] | None = None

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate seeds")


def top_k_ids(q: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, ties toward the smaller id."""
    order = np.lexsort((np.arange(q.shape[0]), -q))
    return order[:k]


def _argmax_excluding(q: np.ndarray, excluded) -> int:
    mask = np.zeros(q.shape[0], dtype=bool)
    for s in excluded:
        mask[s] = True
    candidates = np.flatnonzero(~mask)
    return int(candidates[int(np.argmax(q[candidates]))])


def select_topk(g: Graph, params: QNetParams, k: int, rounds: int = 4) -> SeedSet:
    """Embed once with no seeds and take the k highest-scored nodes."""
    if k > g.n:
        raise ValueError("k=%d exceeds n=%d" % (k, g.n))
    q = q_values(embed(g, [], params, rounds), params)
    ids = top_k_ids(q, k)
    return SeedSet(nodes=[int(v) for v in ids], method="topk", q_values=[float(q[v]) for v in ids])


def select_iterative(g: Graph, params: QNetParams, k: int, rounds: int = 4) -> SeedSet:
    """Classical hill climb: re-embed and re-score after every insertion."""
    if k > g.n:
        raise ValueError("k=%d exceeds n=%d" % (k, g.n))
    seeds: list[int] = []
    scores: list[float] = []
    for _ in range(k):
        q = q_values(embed(g, seeds, params, rounds), params)
        v = _argmax_excluding(q, seeds)
        seeds.append(v)
        scores.append(float(q[v]))
    return SeedSet(nodes=seeds, method="iterative", q_values=scores)


def random_seeds(g: Graph, k: int, rng_seed: int) -> SeedSet:
    """Uniform k-subset without replacement."""
    if k > g.n:
        raise ValueError("k=%d exceeds n=%d" % (k, g.n))
    picked = Stream(rng_seed).choose(range(g.n), k)
    return SeedSet(nodes=[int(v) for v in picked], method="random")


# -- greedy oracles ------------------------------------------------------------


def celf_greedy(
    g: Graph, model: DiffusionModel, k: int, runs: int | None = None, rng_seed: int = 0
) -> SeedSet:
    """Lazy greedy: re-evaluate stale gains until the heap top is fresh.

    `runs=None` evaluates spreads exactly (tiny graphs); an integer runs
    Monte-Carlo marginal gains.  With exact spreads this equals naive
    exhaustive greedy, smallest-id tie-break included, because stale gains
    upper-bound fresh ones under submodularity.
    """
    if k > g.n:
        raise ValueError("k=%d exceeds n=%d" % (k, g.n))
    eval_count = 0

    def gain(seeds, cur, v):
        nonlocal eval_count
        if runs is None:
            return exact_spread(g, model, seeds + [v]) - cur
        eval_count += 1
        return marginal_gain(g, model, seeds, v, runs, substream(rng_seed, "celf", eval_count))

    seeds: list[int] = []
    gains: list[float] = []
    cur = 0.0
    heap = [(-gain([], cur, v), v, 0) for v in range(g.n)]
    heapq.heapify(heap)
    while len(seeds) < k:
        neg, v, at = heapq.heappop(heap)
        if at == len(seeds):
            seeds.append(v)
            gains.append(-neg)
            cur += -neg
        else:
            heapq.heappush(heap, (-gain(seeds, cur, v), v, len(seeds)))
    return SeedSet(nodes=seeds, method="celf", q_values=gains)


def naive_greedy(g: Graph, model: DiffusionModel, k: int) -> SeedSet:
    """Exhaustive greedy over exact spreads; parity oracle for celf_greedy."""
    if k > g.n:
        raise ValueError("k=%d exceeds n=%d" % (k, g.n))
    seeds: list[int] = []
    gains: list[float] = []
    cur = 0.0
    for _ in range(k):
        best_v, best_gain = -1, -np.inf
        for v in range(g.n):
            if v in seeds:
                continue
            gv = exact_spread(g, model, seeds + [v]) - cur
            if gv > best_gain:
                best_v, best_gain = v, gv
        seeds.append(best_v)
        gains.append(best_gain)
        cur += best_gain
    return SeedSet(nodes=seeds, method="celf", q_values=gains)


# -- stability diagnostics -------------------------------------------------------


@dataclass
class StabilityReport:
    """How much one insertion plus re-embedding perturbs the score order."""

    delta_rank: float  # fraction of sampled non-seed pairs keeping their order
    delta_inf: float  # spread(one-shot top-k) / spread(iterative)
    observed_gap: float  # mean |(qa-qb) - (qa'-qb')| on max-min-normalized scores
    gap_bound: float  # sum_{i=1..4} avg_degree^i / n
    gap_bound_sq: float  # tighter variant: sum_{i=1..4} 2i * avg_degree^i / n^2
    per_insertion: list  # (insertion index, preserved fraction, mean gap)
    topk_seeds: list
    iterative_seeds: list


def _normalize(q: np.ndarray) -> np.ndarray:
    lo, hi = float(np.min(q)), float(np.max(q))
    if hi <= lo:
        return np.zeros_like(q)
    return (q - lo) / (hi - lo)


def stability_report(
    g: Graph,
    params: QNetParams,
    k: int,
    rounds: int,
    model: DiffusionModel,
    pair_sample: int | None = 10_000,
    runs: int = 10_000,
    rng_seed: int = 0,
) -> StabilityReport:
    """Run the iterative strategy, sampling score-order changes per insertion.

    `pair_sample=None` enumerates all non-seed pairs (allowed for n <= 2000).
    A pair counts as order-preserving when the score difference does not
    strictly change sign; equal scores preserve by convention.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.n - k < 2:
        raise ValueError("need at least 2 non-seed nodes after k insertions")
    if pair_sample is None and g.n > 2000:
        raise ValueError("full pair enumeration is limited to n <= 2000")

    stream = Stream(substream(rng_seed, "pairs"))
    seeds: list[int] = []
    q_prev = q_values(embed(g, seeds, params, rounds), params)
    per_insertion = []
    preserved_total = 0
    pairs_total = 0
    gap_total = 0.0

    for step in range(1, k + 1):
        v = _argmax_excluding(q_prev, seeds)
        seeds.append(v)
        q_next = q_values(embed(g, seeds, params, rounds), params)

        mask = np.ones(g.n, dtype=bool)
        mask[seeds] = False
        cand = np.flatnonzero(mask)
        nq_prev = _normalize(q_prev)
        nq_next = _normalize(q_next)
        if pair_sample is None:
            ai, bi = np.triu_indices(cand.size, k=1)
            a_nodes, b_nodes = cand[ai], cand[bi]
        else:
            a_idx = np.array([stream.below(cand.size) for _ in range(pair_sample)])
            b_idx = np.array([stream.below(cand.size - 1) for _ in range(pair_sample)])
            b_idx += b_idx >= a_idx
            a_nodes, b_nodes = cand[a_idx], cand[b_idx]

        dq = q_prev[a_nodes] - q_prev[b_nodes]
        dq2 = q_next[a_nodes] - q_next[b_nodes]
        preserved = int(np.count_nonzero(dq * dq2 >= 0))
        gaps = np.abs(
            (nq_prev[a_nodes] - nq_prev[b_nodes]) - (nq_next[a_nodes] - nq_next[b_nodes])
        )
        per_insertion.append((step, preserved / a_nodes.size, float(gaps.mean())))
        preserved_total += preserved
        pairs_total += a_nodes.size
        gap_total += float(gaps.sum())
        q_prev = q_next

    iterative = SeedSet(nodes=seeds, method="iterative")
    topk = select_topk(g, params, k, rounds)
    eval_key = substream(rng_seed, "eval")
    s_top = estimate_spread(g, model, topk.nodes, runs, eval_key).mean
    s_iter = estimate_spread(g, model, iterative.nodes, runs, eval_key).mean

    dbar = average_degree(g)
    powers = [dbar**i for i in range(1, 5)]
    return StabilityReport(
        delta_rank=preserved_total / pairs_total,
        delta_inf=s_top / s_iter,
        observed_gap=gap_total / pairs_total,
        gap_bound=sum(powers) / g.n,
        gap_bound_sq=sum(2 * i * powers[i - 1] for i in range(1, 5)) / g.n**2,
        per_insertion=per_insertion,
        topk_seeds=topk.nodes,
        iterative_seeds=iterative.nodes,
    )
