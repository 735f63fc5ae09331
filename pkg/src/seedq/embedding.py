"""Neighborhood-aggregation node embedding and the node-scoring head.

All node vectors start at zero and are refreshed for a fixed number of
synchronous rounds (each round reads only the previous round's vectors):

    x_v <- relu( W_nbr @ sum_{u in N(v)} x_u
               + W_edge @ sum_{u in N(v)} relu(w(v,u) * w_lift)
               + a_v * w_seed )

where a_v is 1 iff v is in the current seed set.  After the final round a
node's score against the current seed set is a linear readout over the
concatenation of a graph-global sum and the node's own vector:

    score(v) = w_out . relu([ W_global @ sum_u x_u ; W_node @ x_v ])

After `rounds` refreshes x_v depends only on the rounds-hop neighborhood
of v.  The seven parameter tensors are trained elsewhere; this module also
owns their text persistence format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .graph import Graph

PARAM_FIELDS = ("w_nbr", "w_edge", "w_lift", "w_seed", "w_out", "w_global", "w_node")
_MODEL_MAGIC = "qnet-model"
_MODEL_VERSION = 1
INIT_SCALE = 0.1  # parameters start uniform in the open interval (0, 0.1)


@dataclass
class QNetParams:
    """The seven learnable tensors of the embedding + scoring network."""

    w_nbr: np.ndarray  # (d, d) mixes summed neighbor vectors
    w_edge: np.ndarray  # (d, d) mixes summed lifted edge weights
    w_lift: np.ndarray  # (d,)   lifts a scalar edge weight to a vector
    w_seed: np.ndarray  # (d,)   lifts the 0/1 seed indicator
    w_out: np.ndarray  # (2d,)  readout over [global ; node]
    w_global: np.ndarray  # (d, d) acts on the graph-wide vector sum
    w_node: np.ndarray  # (d, d) acts on the candidate node vector

    def __post_init__(self):
        d = self.w_lift.size
        shapes = {
            "w_nbr": (d, d), "w_edge": (d, d), "w_lift": (d,), "w_seed": (d,),
            "w_out": (2 * d,), "w_global": (d, d), "w_node": (d, d),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ValueError("%s has shape %s, want %s" % (name, got, want))

    @property
    def dim(self) -> int:
        return self.w_lift.size

    def arrays(self):
        return [(name, getattr(self, name)) for name in PARAM_FIELDS]

    def copy(self) -> "QNetParams":
        return QNetParams(*(getattr(self, f).copy() for f in PARAM_FIELDS))

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, f))) for f in PARAM_FIELDS)

    @classmethod
    def zeros(cls, dim: int) -> "QNetParams":
        return cls(
            np.zeros((dim, dim)), np.zeros((dim, dim)), np.zeros(dim), np.zeros(dim),
            np.zeros(2 * dim), np.zeros((dim, dim)), np.zeros((dim, dim)),
        )


def init_params(dim: int, rng_seed: int) -> QNetParams:
    """Fresh parameters, every entry uniform in (0, 0.1), per-seed determinate."""
    if dim < 1:
        raise ValueError("embedding dimension must be >= 1")
    draws = iter(range(1 << 62))
    key = rng_seed

    def tensor(*shape):
        flat = np.array(
            [rng.unit_open_at(key, next(draws)) * INIT_SCALE for _ in range(int(np.prod(shape)))]
        )
        return flat.reshape(shape)

    return QNetParams(
        w_nbr=tensor(dim, dim),
        w_edge=tensor(dim, dim),
        w_lift=tensor(dim),
        w_seed=tensor(dim),
        w_out=tensor(2 * dim),
        w_global=tensor(dim, dim),
        w_node=tensor(dim, dim),
    )


@dataclass
class Embedding:
    """Per-node vectors plus the seed indicators they were computed under."""

    vectors: np.ndarray  # (n, d)
    seed_mask: np.ndarray  # (n,) floats in {0, 1}
    rounds: int


# -- aggregation helpers -------------------------------------------------------


def _segment_sum(mat: np.ndarray, indptr: np.ndarray, n: int) -> np.ndarray:
    """Row-segment sums of a (A, d) matrix into (n, d)."""
    out = np.zeros((n, mat.shape[1]))
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    if mat.shape[0] and nonempty.any():
        out[nonempty] = np.add.reduceat(mat, starts[nonempty], axis=0)
    return out


def _gather_sum(g: Graph, x: np.ndarray, mode: str) -> np.ndarray:
    """sum_{u in N(v)} x_u per node; N(v) selected by `mode`."""
    if mode == "out":
        return _segment_sum(x[g.arc_dst], g.out_indptr, g.n)
    if mode == "in":
        return _segment_sum(x[g.arc_src[g.in_order]], g.in_indptr, g.n)
    if mode == "both":
        return _segment_sum(x[g.arc_dst], g.out_indptr, g.n) + _segment_sum(
            x[g.arc_src[g.in_order]], g.in_indptr, g.n
        )
    raise ValueError("neighbor mode must be out|in|both, got %r" % (mode,))


def _scatter_back(g: Graph, d_nbr: np.ndarray, mode: str) -> np.ndarray:
    """Adjoint of _gather_sum."""
    if mode == "out":
        return _segment_sum(d_nbr[g.arc_src[g.in_order]], g.in_indptr, g.n)
    if mode == "in":
        return _segment_sum(d_nbr[g.arc_dst], g.out_indptr, g.n)
    return _segment_sum(d_nbr[g.arc_src[g.in_order]], g.in_indptr, g.n) + _segment_sum(
        d_nbr[g.arc_dst], g.out_indptr, g.n
    )


def _edge_sum(g: Graph, params: QNetParams, mode: str) -> np.ndarray:
    """sum_{u in N(v)} relu(w(v,u) * w_lift) per node."""
    lifted = np.maximum(g.arc_w[:, None] * params.w_lift[None, :], 0.0)
    if mode == "out":
        return _segment_sum(lifted, g.out_indptr, g.n)
    if mode == "in":
        return _segment_sum(lifted[g.in_order], g.in_indptr, g.n)
    return _segment_sum(lifted, g.out_indptr, g.n) + _segment_sum(
        lifted[g.in_order], g.in_indptr, g.n
    )


def _arc_weight_sums(g: Graph, mode: str) -> np.ndarray:
    """sum of |incident arc weights| per node under `mode` (for the lift grad)."""
    w = g.arc_w[:, None]
    if mode == "out":
        return _segment_sum(w, g.out_indptr, g.n)[:, 0]
    if mode == "in":
        return _segment_sum(w[g.in_order], g.in_indptr, g.n)[:, 0]
    return (
        _segment_sum(w, g.out_indptr, g.n) + _segment_sum(w[g.in_order], g.in_indptr, g.n)
    )[:, 0]


# -- forward -------------------------------------------------------------------


def _seed_mask(g: Graph, seeds) -> np.ndarray:
    a = np.zeros(g.n)
    for s in seeds:
        if not (0 <= s < g.n):
            raise ValueError("seed %d outside graph" % s)
        a[int(s)] = 1.0
    return a


@dataclass
class _ForwardCache:
    graph: Graph
    mode: str
    a: np.ndarray
    edge_sum: np.ndarray  # (n, d)
    base: np.ndarray  # (n, d) round-independent part of the pre-activation
    xs: list  # x_0 .. x_rounds
    nbrs: list  # neighbor sums feeding rounds 1 .. rounds
    pres: list  # pre-activations of rounds 1 .. rounds


def _forward(g: Graph, seeds, params: QNetParams, rounds: int, mode: str) -> _ForwardCache:
    a = _seed_mask(g, seeds)
    E = _edge_sum(g, params, mode)
    base = E @ params.w_edge.T + a[:, None] * params.w_seed[None, :]
    x = np.zeros((g.n, params.dim))
    xs, nbrs, pres = [x], [], []
    for _ in range(rounds):
        nbr = _gather_sum(g, x, mode)
        pre = nbr @ params.w_nbr.T + base
        x = np.maximum(pre, 0.0)
        nbrs.append(nbr)
        pres.append(pre)
        xs.append(x)
    return _ForwardCache(g, mode, a, E, base, xs, nbrs, pres)


def embed(g: Graph, seeds, params: QNetParams, rounds: int = 4, mode: str = "out") -> Embedding:
    """Run `rounds` synchronous refreshes from all-zero vectors."""
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    cache = _forward(g, seeds, params, rounds, mode)
    return Embedding(vectors=cache.xs[-1], seed_mask=cache.a, rounds=rounds)


def q_values(emb: Embedding, params: QNetParams) -> np.ndarray:
    """Score of every node against the seed set the embedding was built with."""
    d = params.dim
    if emb.vectors.shape[1] != d:
        raise ValueError("embedding dim %d != params dim %d" % (emb.vectors.shape[1], d))
    gsum = emb.vectors.sum(axis=0)
    rg = np.maximum(params.w_global @ gsum, 0.0)
    rn = np.maximum(emb.vectors @ params.w_node.T, 0.0)
    return rn @ params.w_out[d:] + float(params.w_out[:d] @ rg)


def _head_value(cache: _ForwardCache, params: QNetParams, v: int) -> float:
    d = params.dim
    x = cache.xs[-1]
    gsum = x.sum(axis=0)
    rg = np.maximum(params.w_global @ gsum, 0.0)
    rn = np.maximum(params.w_node @ x[v], 0.0)
    return float(params.w_out[:d] @ rg + params.w_out[d:] @ rn)


def _head_backward(cache: _ForwardCache, params: QNetParams, v: int, coeff: float, grads: QNetParams) -> None:
    """Accumulate coeff * d score(v) / d params into `grads`.

    Subgradient at relu kinks is 0 (masks use strict positivity).
    """
    g, d = cache.graph, params.dim
    x = cache.xs[-1]
    gsum = x.sum(axis=0)
    zg = params.w_global @ gsum
    zn = params.w_node @ x[v]
    rg = np.maximum(zg, 0.0)
    rn = np.maximum(zn, 0.0)

    grads.w_out[:d] += coeff * rg
    grads.w_out[d:] += coeff * rn
    dzg = coeff * params.w_out[:d] * (zg > 0)
    grads.w_global += np.outer(dzg, gsum)
    dzn = coeff * params.w_out[d:] * (zn > 0)
    grads.w_node += np.outer(dzn, x[v])

    dx = np.empty_like(x)
    dx[:] = params.w_global.T @ dzg
    dx[v] += params.w_node.T @ dzn

    d_edge_sum = np.zeros_like(cache.edge_sum)
    for i in range(len(cache.pres) - 1, -1, -1):
        dpre = dx * (cache.pres[i] > 0)
        grads.w_nbr += dpre.T @ cache.nbrs[i]
        grads.w_edge += dpre.T @ cache.edge_sum
        grads.w_seed += dpre.T @ cache.a
        d_edge_sum += dpre @ params.w_edge
        dx = _scatter_back(g, dpre @ params.w_nbr, cache.mode)

    # lifted edge features: relu(w_arc * w_lift), arc weights are >= 0 so the
    # relu mask collapses to the sign of w_lift and the arc sum per node
    wsums = _arc_weight_sums(g, cache.mode)
    grads.w_lift += (params.w_lift > 0) * (wsums @ d_edge_sum)


# -- persistence ---------------------------------------------------------------


def save_model(path: str, params: QNetParams, rounds: int) -> None:
    """Versioned text format; floats use repr so reloads are bit-exact."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("%s v%d\n" % (_MODEL_MAGIC, _MODEL_VERSION))
        f.write("dim %d\n" % params.dim)
        f.write("rounds %d\n" % rounds)
        for name, arr in params.arrays():
            a2 = np.atleast_2d(arr)
            f.write("tensor %s %s\n" % (name, " ".join(str(s) for s in arr.shape)))
            for row in a2:
                f.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_model(path: str) -> tuple[QNetParams, int]:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    if not lines or not lines[0].startswith(_MODEL_MAGIC):
        raise ValueError("not a model file: %s" % path)
    version = lines[0].split("v")[-1]
    if int(version) != _MODEL_VERSION:
        raise ValueError("unsupported model version %s" % version)
    dim = int(lines[1].split()[1])
    rounds = int(lines[2].split()[1])
    fields = {}
    i = 3
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        head = lines[i].split()
        if head[0] != "tensor":
            raise ValueError("bad model line %d: %r" % (i + 1, lines[i]))
        name, shape = head[1], tuple(int(s) for s in head[2:])
        nrows = shape[0] if len(shape) == 2 else 1
        rows = [
            np.array([float(x) for x in lines[i + 1 + r].split()]) for r in range(nrows)
        ]
        fields[name] = np.vstack(rows).reshape(shape)
        i += 1 + nrows
    missing = [f for f in PARAM_FIELDS if f not in fields]
    if missing:
        raise ValueError("model file missing tensors: %s" % ", ".join(missing))
    params = QNetParams(**{f: fields[f] for f in PARAM_FIELDS})
    if params.dim != dim:
        raise ValueError("model dim header %d disagrees with tensors" % dim)
    return params, rounds
