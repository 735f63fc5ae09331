"""Synthetic graph generators for experiments, benchmarks and oracles."""

from __future__ import annotations

from .graph import Graph
from .rng import Stream, substream


def preferential_attachment(n: int, attach: int, rng_seed: int, weight: float = 0.5) -> Graph:
    """Undirected scale-free graph: each new node links to `attach` earlier
    nodes chosen proportionally to degree (repeated-endpoint sampling)."""
    if n < attach + 1:
        raise ValueError("need n >= attach + 1")
    stream = Stream(substream(rng_seed, "pa"))
    edges = []
    endpoints: list[int] = []
    # seed clique over the first attach+1 nodes
    for u in range(attach + 1):
        for v in range(u + 1, attach + 1):
            edges.append((u, v, weight))
            endpoints += [u, v]
    for v in range(attach + 1, n):
        targets: set[int] = set()
        while len(targets) < attach:
            t = endpoints[stream.below(len(endpoints))]
            targets.add(t)
        for t in sorted(targets):
            edges.append((t, v, weight))
            endpoints += [t, v]
    return Graph(n, False, edges)


def pa_snapshots(sizes, attach: int, rng_seed: int, weight: float = 0.5) -> list[Graph]:
    """Growing snapshots of one preferential-attachment process.

    Later snapshots are supergraphs of earlier ones (same external ids).
    """
    sizes = sorted(sizes)
    full = preferential_attachment(sizes[-1], attach, rng_seed, weight)
    out = []
    for s in sizes:
        edges = [
            (int(u), int(v), float(w))
            for u, v, w in zip(full.edge_src, full.edge_dst, full.edge_w)
            if u < s and v < s
        ]
        out.append(Graph(s, False, edges))
    return out


def random_digraph(
    max_nodes: int,
    max_arcs: int,
    rng_seed: int,
    w_lo: float = 0.1,
    w_hi: float = 0.9,
    min_nodes: int = 2,
) -> Graph:
    """Small random weighted digraph for enumeration oracles."""
    stream = Stream(substream(rng_seed, "digraph"))
    n = min_nodes + stream.below(max_nodes - min_nodes + 1)
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    stream.shuffle(pairs)
    m = 1 + stream.below(min(max_arcs, len(pairs)))
    edges = [(u, v, w_lo + (w_hi - w_lo) * stream.unit()) for u, v in pairs[:m]]
    return Graph(n, True, edges)
