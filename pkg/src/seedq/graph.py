"""Immutable weighted graph with dense 0-based node ids.

Nodes are remapped to dense ids at load time (first appearance order) so
embeddings and score vectors can index by position; the original external
ids are kept for I/O.  Undirected graphs store each edge once logically but
expose directed arcs in both directions, which is also how the cascade
models consume them.

The arc arrays are the canonical representation shared with the simulation
kernels: ``arc_src``/``arc_dst``/``arc_w`` sorted by (src, dst) with the CSR
offsets in ``out_indptr``; ``in_order`` permutes arcs into (dst, src) order
with offsets in ``in_indptr``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

NodeId = int


class GraphFormatError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous empirical CDF: fraction of observations <= x."""

    values: np.ndarray  # ascending unique support points
    fractions: np.ndarray  # cumulative fractions, last entry == 1

    def at(self, x) -> float:
        i = int(np.searchsorted(self.values, x, side="right")) - 1
        return float(self.fractions[i]) if i >= 0 else 0.0


class Graph:
    """Weighted directed or undirected graph, immutable after construction."""

    __slots__ = (
        "n",
        "directed",
        "arc_src",
        "arc_dst",
        "arc_w",
        "out_indptr",
        "in_order",
        "in_indptr",
        "edge_src",
        "edge_dst",
        "edge_w",
        "ext_ids",
        "_ext_index",
    )

    def __init__(self, n: int, directed: bool, edges, ext_ids=None):
        """Build from dense-id logical edges [(u, v, w), ...].

        Undirected edges may be given in either orientation but each
        unordered pair at most once.
        """
        self.n = int(n)
        self.directed = bool(directed)
        if ext_ids is None:
            ext_ids = list(range(self.n))
        if len(ext_ids) != self.n:
            raise ValueError("ext_ids length %d != n %d" % (len(ext_ids), self.n))
        self.ext_ids = list(ext_ids)
        self._ext_index = {e: i for i, e in enumerate(self.ext_ids)}
        if len(self._ext_index) != self.n:
            raise ValueError("duplicate external ids")

        seen = set()
        es, ed, ew = [], [], []
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError("edge (%d,%d) outside node range" % (u, v))
            if u == v:
                raise ValueError("self-loop at node %d" % u)
            if not (0.0 <= w <= 1.0):
                raise ValueError("weight %r outside [0,1]" % w)
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise ValueError("duplicate edge (%d,%d)" % (u, v))
            seen.add(key)
            es.append(u)
            ed.append(v)
            ew.append(w)
        self.edge_src = np.asarray(es, dtype=np.int64)
        self.edge_dst = np.asarray(ed, dtype=np.int64)
        self.edge_w = np.asarray(ew, dtype=np.float64)

        if self.directed:
            a_src, a_dst, a_w = self.edge_src, self.edge_dst, self.edge_w
        else:
            a_src = np.concatenate([self.edge_src, self.edge_dst])
            a_dst = np.concatenate([self.edge_dst, self.edge_src])
            a_w = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((a_dst, a_src))
        self.arc_src = np.ascontiguousarray(a_src[order])
        self.arc_dst = np.ascontiguousarray(a_dst[order])
        self.arc_w = np.ascontiguousarray(a_w[order])
        self.out_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.out_indptr, self.arc_src + 1, 1)
        np.cumsum(self.out_indptr, out=self.out_indptr)
        self.in_order = np.lexsort((self.arc_src, self.arc_dst)).astype(np.int64)
        self.in_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.in_indptr, self.arc_dst + 1, 1)
        np.cumsum(self.in_indptr, out=self.in_indptr)

    # -- basic accessors ----------------------------------------------------

    @property
    def num_edges(self) -> int:
        """Logical edge count m (undirected edges counted once)."""
        return int(self.edge_src.size)

    @property
    def num_arcs(self) -> int:
        """Directed arc count (= 2m for undirected graphs)."""
        return int(self.arc_src.size)

    def neighbors(self, v: NodeId) -> np.ndarray:
        """Out-neighbors of v (all neighbors when undirected), ascending."""
        return self.arc_dst[self.out_indptr[v] : self.out_indptr[v + 1]]

    def in_neighbors(self, v: NodeId) -> np.ndarray:
        arcs = self.in_order[self.in_indptr[v] : self.in_indptr[v + 1]]
        return self.arc_src[arcs]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def to_dense(self, external_id: int) -> NodeId:
        return self._ext_index[external_id]

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return "Graph(n=%d, m=%d, %s)" % (self.n, self.num_edges, kind)


# -- loading / saving --------------------------------------------------------


def load_edge_list(source, directed: bool, default_weight: float = 0.5) -> Graph:
    """Parse whitespace-separated "u v" / "u v w" lines into a Graph.

    Lines starting with '#' are ignored.  External ids are arbitrary
    non-negative integers and are densely remapped in first-appearance
    order.  Missing weights take `default_weight`.
    """
    if not (0.0 <= default_weight <= 1.0):
        raise ValueError("default_weight outside [0,1]")
    if isinstance(source, (str, bytes)):
        text = source.decode("utf-8") if isinstance(source, bytes) else source
        lines = io.StringIO(text)
    else:
        lines = source

    ext_ids: list[int] = []
    index: dict[int, int] = {}
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    def dense(ext: int) -> int:
        i = index.get(ext)
        if i is None:
            i = len(ext_ids)
            index[ext] = i
            ext_ids.append(ext)
        return i

    for line_no, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(line_no, "expected 'u v' or 'u v w', got %r" % stripped)
        try:
            u_ext, v_ext = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(line_no, "node ids must be integers: %r" % stripped) from None
        if u_ext < 0 or v_ext < 0:
            raise GraphFormatError(line_no, "node ids must be non-negative")
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(line_no, "bad weight %r" % parts[2]) from None
        else:
            w = default_weight
        if not (0.0 <= w <= 1.0):
            raise GraphFormatError(line_no, "weight %r outside [0,1]" % w)
        if u_ext == v_ext:
            raise GraphFormatError(line_no, "self-loop at %d" % u_ext)
        u, v = dense(u_ext), dense(v_ext)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(line_no, "duplicate edge (%d,%d)" % (u_ext, v_ext))
        seen.add(key)
        edges.append((u, v, w))

    return Graph(len(ext_ids), directed, edges, ext_ids)


def save_edge_list(g: Graph, target, header_lines=()) -> None:
    """Write "u v w" lines using external ids; floats round-trip bit-exactly."""
    own = isinstance(target, str)
    out = open(target, "w", encoding="utf-8") if own else target
    try:
        for line in header_lines:
            out.write("# %s\n" % line)
        for u, v, w in zip(g.edge_src, g.edge_dst, g.edge_w):
            out.write("%d %d %s\n" % (g.ext_ids[u], g.ext_ids[v], repr(float(w))))
    finally:
        if own:
            out.close()


# -- statistics ---------------------------------------------------------------


def average_degree(g: Graph) -> float:
    """Mean out-degree (directed) or mean degree (undirected): arcs / n."""
    if g.n == 0:
        raise ValueError("average_degree of empty graph")
    return g.num_arcs / g.n


def degree_distribution(g: Graph) -> EmpiricalCdf:
    """Empirical CDF of node degrees (out-degrees when directed)."""
    if g.n == 0:
        raise ValueError("degree_distribution of empty graph")
    degs = g.out_degrees()
    values, counts = np.unique(degs, return_counts=True)
    fractions = np.cumsum(counts) / g.n
    return EmpiricalCdf(values.astype(np.float64), fractions)


def clustering_distribution(g: Graph) -> EmpiricalCdf:
    """Empirical CDF of local clustering coefficients.

    Directed graphs are projected onto their undirected skeleton first;
    degree-<2 nodes have coefficient 0.  Quadratic in degree, intended for
    sampler-fidelity checks at desk scale.
    """
    if g.n == 0:
        raise ValueError("clustering_distribution of empty graph")
    nbrs = [set() for _ in range(g.n)]
    for u, v in zip(g.edge_src, g.edge_dst):
        nbrs[u].add(int(v))
        nbrs[v].add(int(u))
    coeffs = np.zeros(g.n)
    for v in range(g.n):
        d = len(nbrs[v])
        if d < 2:
            continue
        links = 0
        for u in nbrs[v]:
            # count each triangle edge once per endpoint pair
            links += len(nbrs[v] & nbrs[u])
        coeffs[v] = links / (d * (d - 1))
    values, counts = np.unique(coeffs, return_counts=True)
    return EmpiricalCdf(values, np.cumsum(counts) / g.n)
