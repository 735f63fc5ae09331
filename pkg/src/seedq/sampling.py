"""Topology-based subgraph samplers and the CDF distance used to score them.

Five samplers: breadth-first (bfs), snowball (sb, breadth-first with a cap
on neighbors added per expansion), simple random walk (srw), random walk
with flyback (rwf), and induced-subgraph random walk (isrw).  bfs/sb/isrw
return the node-induced subgraph on the collected node set; srw/rwf keep
only traversed edges.

All samplers collect exactly ceil(fraction * n) nodes and are deterministic
given the spec's rng_seed.  When a walk or frontier exhausts (or a walk
makes 100*n consecutive steps without discovering a node) it restarts from
a uniform-random not-yet-sampled node.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import EmpiricalCdf, Graph
from .rng import Stream

METHODS = ("bfs", "srw", "rwf", "isrw", "sb")

# walk steps without a new node before giving up and teleporting
_STALL_FACTOR = 100


@dataclass(frozen=True)
class SampleSpec:
    method: str = "bfs"
    fraction: float = 0.1
    flyback_p: float = 0.15  # rwf only
    snowball_limit: int = 100  # sb only
    rng_seed: int = 0
    root: int | None = None  # fix the first root instead of drawing it

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("unknown sampling method %r" % (self.method,))
        if not (0.0 < self.fraction <= 1.0):
            raise ValueError("fraction must be in (0, 1]")
        if not (0.0 <= self.flyback_p < 1.0):
            raise ValueError("flyback_p must be in [0, 1)")
        if self.snowball_limit < 1:
            raise ValueError("snowball_limit must be >= 1")


def sample_subgraph(g: Graph, spec: SampleSpec) -> Graph:
    """Sample ceil(fraction * n) nodes from g per the spec's method."""
    target = math.ceil(spec.fraction * g.n)
    if spec.fraction * g.n < 2:
        raise ValueError("sample of %.3g * %d nodes is below 2" % (spec.fraction, g.n))
    if g.num_edges == 0:
        raise ValueError("cannot sample a graph with no edges")

    stream = Stream(spec.rng_seed)
    if spec.method in ("bfs", "sb"):
        limit = spec.snowball_limit if spec.method == "sb" else 0
        nodes = _frontier_sample(g, target, stream, limit, spec.root)
        return _induced(g, nodes)
    nodes, walked = _walk_sample(g, target, stream, spec)
    if spec.method == "isrw":
        return _induced(g, nodes)
    return _traversal(g, nodes, walked)


def _first_root(g: Graph, stream: Stream, root: int | None) -> int:
    if root is not None:
        if not (0 <= root < g.n):
            raise ValueError("root %d outside graph" % root)
        return root
    return stream.below(g.n)


def _fresh_node(g: Graph, stream: Stream, in_sample: np.ndarray) -> int:
    """Uniform-random restart node among the not-yet-sampled ones."""
    remaining = np.flatnonzero(~in_sample)
    return int(remaining[stream.below(remaining.size)])


def _frontier_sample(g, target, stream, limit, root) -> np.ndarray:
    in_sample = np.zeros(g.n, dtype=bool)
    queue: deque[int] = deque()
    count = 0

    def add(v):
        nonlocal count
        in_sample[v] = True
        queue.append(v)
        count += 1

    add(_first_root(g, stream, root))
    while count < target:
        if not queue:
            add(_fresh_node(g, stream, in_sample))
            continue
        v = queue.popleft()
        taken = 0
        for u in g.neighbors(v):
            if in_sample[u]:
                continue
            add(int(u))
            taken += 1
            if count >= target:
                break
            if limit and taken >= limit:
                break
    return np.flatnonzero(in_sample)


def _walk_sample(g, target, stream, spec):
    in_sample = np.zeros(g.n, dtype=bool)
    walked: set[tuple[int, int]] = set()
    stall_cap = _STALL_FACTOR * g.n

    cur = _first_root(g, stream, spec.root)
    walk_root = cur
    in_sample[cur] = True
    count = 1
    stall = 0
    while count < target:
        nbrs = g.neighbors(cur)
        if nbrs.size == 0 or stall >= stall_cap:
            cur = _fresh_node(g, stream, in_sample)
            walk_root = cur
            in_sample[cur] = True
            count += 1
            stall = 0
            continue
        if spec.method == "rwf" and stream.unit() < spec.flyback_p:
            cur = walk_root
            continue
        nxt = int(nbrs[stream.below(nbrs.size)])
        key = (cur, nxt) if g.directed else (min(cur, nxt), max(cur, nxt))
        walked.add(key)
        if in_sample[nxt]:
            stall += 1
        else:
            in_sample[nxt] = True
            count += 1
            stall = 0
        cur = nxt
    return np.flatnonzero(in_sample), walked


def _induced(g: Graph, nodes: np.ndarray) -> Graph:
    keep = np.zeros(g.n, dtype=bool)
    keep[nodes] = True
    remap = -np.ones(g.n, dtype=np.int64)
    remap[nodes] = np.arange(nodes.size)
    mask = keep[g.edge_src] & keep[g.edge_dst]
    edges = [
        (int(remap[u]), int(remap[v]), float(w))
        for u, v, w in zip(g.edge_src[mask], g.edge_dst[mask], g.edge_w[mask])
    ]
    ext = [g.ext_ids[v] for v in nodes]
    return Graph(nodes.size, g.directed, edges, ext)


def _traversal(g: Graph, nodes: np.ndarray, walked: set) -> Graph:
    remap = -np.ones(g.n, dtype=np.int64)
    remap[nodes] = np.arange(nodes.size)
    weight = {}
    for u, v, w in zip(g.edge_src, g.edge_dst, g.edge_w):
        key = (int(u), int(v)) if g.directed else (min(int(u), int(v)), max(int(u), int(v)))
        weight[key] = float(w)
    edges = [(int(remap[u]), int(remap[v]), weight[(u, v)]) for u, v in sorted(walked)]
    ext = [g.ext_ids[v] for v in nodes]
    return Graph(nodes.size, g.directed, edges, ext)


def ks_d_statistic(f0: EmpiricalCdf, f1: EmpiricalCdf) -> float:
    """Max vertical distance between two empirical CDFs."""
    if f0.values.size == 0 or f1.values.size == 0:
        raise ValueError("empty CDF")
    support = np.union1d(f0.values, f1.values)
    i0 = np.searchsorted(f0.values, support, side="right") - 1
    i1 = np.searchsorted(f1.values, support, side="right") - 1
    c0 = np.where(i0 >= 0, f0.fractions[np.maximum(i0, 0)], 0.0)
    c1 = np.where(i1 >= 0, f1.fractions[np.maximum(i1, 0)], 0.0)
    return float(np.max(np.abs(c0 - c1)))
