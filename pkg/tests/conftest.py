import pytest

from seedq.graph import Graph


@pytest.fixture
def triangle():
    """A->B, A->C, B->C with w=0.5; exact ic spread from {A} is 2.125."""
    return Graph(3, True, [(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5)])


@pytest.fixture
def path3():
    """Undirected path 0-1-2, w=1."""
    return Graph(3, False, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def star5():
    """Undirected star: center 0 with leaves 1..4."""
    return Graph(5, False, [(0, i, 0.5) for i in range(1, 5)])


def brute_force_ic_spread(g: Graph, seeds) -> float:
    """Independent re-derivation of exact ic spread: enumerate arc subsets
    with plain python sets and breadth-first reachability."""
    arcs = list(zip(g.arc_src.tolist(), g.arc_dst.tolist(), g.arc_w.tolist()))
    total = 0.0
    for world in range(1 << len(arcs)):
        p = 1.0
        live = []
        for j, (u, v, w) in enumerate(arcs):
            if (world >> j) & 1:
                p *= w
                live.append((u, v))
            else:
                p *= 1.0 - w
        reached = set(seeds)
        frontier = list(seeds)
        while frontier:
            u = frontier.pop()
            for a, b in live:
                if a == u and b not in reached:
                    reached.add(b)
                    frontier.append(b)
        total += p * len(reached)
    return total
