import numpy as np
import pytest

from seedq.graph import Graph, degree_distribution, EmpiricalCdf
from seedq.sampling import SampleSpec, ks_d_statistic, sample_subgraph
from seedq.synth import preferential_attachment


def path_graph(n):
    return Graph(n, False, [(i, i + 1, 0.5) for i in range(n - 1)])


def star_graph(leaves):
    return Graph(leaves + 1, False, [(0, i, 0.5) for i in range(1, leaves + 1)])


def test_bfs_on_path_from_node0():
    sub = sample_subgraph(path_graph(10), SampleSpec(method="bfs", fraction=0.5, root=0))
    assert sorted(sub.ext_ids) == [0, 1, 2, 3, 4]
    assert sub.num_edges == 4  # induced path


def test_full_fraction_identity_for_induced_methods():
    g = preferential_attachment(40, 2, rng_seed=9)
    for method in ("bfs", "sb", "isrw"):
        sub = sample_subgraph(g, SampleSpec(method=method, fraction=1.0, rng_seed=3))
        assert sub.n == g.n
        assert sub.num_edges == g.num_edges
        pairs = {(min(a, b), max(a, b)) for a, b in zip(sub.edge_src, sub.edge_dst)}
        parent = {(min(a, b), max(a, b)) for a, b in zip(g.edge_src, g.edge_dst)}
        assert pairs == parent


def test_snowball_limit_on_star():
    sub = sample_subgraph(
        star_graph(9), SampleSpec(method="sb", fraction=0.4, snowball_limit=3, root=0)
    )
    assert sub.n == 4
    assert 0 in sub.ext_ids
    assert sub.num_edges == 3


def test_sample_size_is_exact_ceiling():
    g = preferential_attachment(50, 2, rng_seed=4)
    for method in ("bfs", "srw", "rwf", "isrw", "sb"):
        for frac in (0.1, 0.33, 0.5):
            sub = sample_subgraph(g, SampleSpec(method=method, fraction=frac, rng_seed=8))
            assert sub.n == int(np.ceil(frac * g.n)), method


def test_same_seed_same_subgraph():
    g = preferential_attachment(60, 2, rng_seed=1)
    for method in ("bfs", "srw", "rwf", "isrw", "sb"):
        spec = SampleSpec(method=method, fraction=0.25, rng_seed=77)
        a = sample_subgraph(g, spec)
        b = sample_subgraph(g, spec)
        assert a.ext_ids == b.ext_ids
        assert np.array_equal(a.edge_src, b.edge_src)
        assert np.array_equal(a.edge_dst, b.edge_dst)


def test_distinct_seeds_usually_differ():
    g = preferential_attachment(60, 2, rng_seed=1)
    subs = {
        tuple(sample_subgraph(g, SampleSpec(method="srw", fraction=0.2, rng_seed=s)).ext_ids)
        for s in range(5)
    }
    assert len(subs) > 1


def test_induced_methods_keep_all_internal_edges():
    g = preferential_attachment(80, 3, rng_seed=2)
    for method in ("bfs", "sb", "isrw"):
        sub = sample_subgraph(g, SampleSpec(method=method, fraction=0.3, rng_seed=5))
        kept = set(sub.ext_ids)
        expected = sum(
            1 for a, b in zip(g.edge_src, g.edge_dst) if int(a) in kept and int(b) in kept
        )
        assert sub.num_edges == expected, method


def test_walk_methods_keep_only_traversed_edges():
    g = preferential_attachment(80, 3, rng_seed=2)
    full = {(min(a, b), max(a, b)) for a, b in zip(g.edge_src, g.edge_dst)}
    for method in ("srw", "rwf"):
        sub = sample_subgraph(g, SampleSpec(method=method, fraction=0.3, rng_seed=5))
        sub_pairs = {
            (min(sub.ext_ids[a], sub.ext_ids[b]), max(sub.ext_ids[a], sub.ext_ids[b]))
            for a, b in zip(sub.edge_src, sub.edge_dst)
        }
        assert sub_pairs <= full
        # walks generally traverse fewer edges than the induced count
        kept = set(sub.ext_ids)
        induced = sum(1 for a, b in full if a in kept and b in kept)
        assert sub.num_edges <= induced


def test_restart_covers_disconnected_graph():
    # two components; target size forces a restart into the second one
    g = Graph(6, False, [(0, 1, 0.5), (1, 2, 0.5), (3, 4, 0.5), (4, 5, 0.5)])
    sub = sample_subgraph(g, SampleSpec(method="bfs", fraction=1.0, rng_seed=0))
    assert sub.n == 6
    sub = sample_subgraph(g, SampleSpec(method="srw", fraction=1.0, rng_seed=0))
    assert sub.n == 6


def test_sample_errors():
    g = path_graph(10)
    with pytest.raises(ValueError):
        sample_subgraph(g, SampleSpec(fraction=0.1))  # 1 node < 2
    with pytest.raises(ValueError):
        sample_subgraph(Graph(5, False, []), SampleSpec(fraction=0.8))
    with pytest.raises(ValueError):
        SampleSpec(method="nope")
    with pytest.raises(ValueError):
        SampleSpec(fraction=0.0)
    with pytest.raises(ValueError):
        SampleSpec(flyback_p=1.0)
    with pytest.raises(ValueError):
        SampleSpec(snowball_limit=0)


def _cdf(values):
    vals, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return EmpiricalCdf(vals, np.cumsum(counts) / len(values))


def test_ks_identical_is_zero():
    f = _cdf([1, 2, 2, 3])
    assert ks_d_statistic(f, f) == 0.0


def test_ks_disjoint_degenerate_is_one():
    assert ks_d_statistic(_cdf([1]), _cdf([5])) == 1.0


def test_ks_hand_computed_third():
    assert ks_d_statistic(_cdf([1, 1, 2]), _cdf([1, 2, 2])) == pytest.approx(1 / 3)


def test_ks_symmetric_and_triangle():
    f0, f1, f2 = _cdf([1, 2, 3]), _cdf([2, 2, 4]), _cdf([1, 4, 4])
    assert ks_d_statistic(f0, f1) == ks_d_statistic(f1, f0)
    assert ks_d_statistic(f0, f2) <= ks_d_statistic(f0, f1) + ks_d_statistic(f1, f2) + 1e-15


def test_ks_empty_errors():
    f = _cdf([1])
    empty = EmpiricalCdf(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        ks_d_statistic(f, empty)


def test_sampler_dstat_reasonable():
    g = preferential_attachment(300, 2, rng_seed=3)
    sub = sample_subgraph(g, SampleSpec(method="bfs", fraction=0.2, rng_seed=1))
    d = ks_d_statistic(degree_distribution(g), degree_distribution(sub))
    assert 0.0 <= d <= 1.0
