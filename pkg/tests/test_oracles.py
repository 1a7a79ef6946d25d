import itertools
import random

import pytest

from congestbench.graphs import DirectedOverlay, Graph, GraphError, generate
from congestbench.oracles import (
    apsp_oracle,
    bfs_distances,
    follow_pointer_chain,
    hop_limited_distances,
    mst_oracle,
)


def floyd_warshall(g):
    """Independent all-pairs oracle for cross-checking BFS."""
    inf = float("inf")
    dist = {(u, v): (0 if u == v else inf) for u in g.nodes for v in g.nodes}
    for u, v in g.edges:
        dist[(u, v)] = dist[(v, u)] = 1
    for k in g.nodes:
        for i in g.nodes:
            dik = dist[(i, k)]
            if dik == inf:
                continue
            for j in g.nodes:
                if dik + dist[(k, j)] < dist[(i, j)]:
                    dist[(i, j)] = dik + dist[(k, j)]
    return dist


def test_bfs_path():
    g = generate("path", n=4)
    assert bfs_distances(g, 0) == {0: 0, 1: 1, 2: 2, 3: 3}


def test_bfs_star_leaf():
    g = generate("star", n=5)
    d = bfs_distances(g, 1)
    assert d[0] == 1 and all(d[v] == 2 for v in (2, 3, 4))


def test_bfs_matches_floyd_warshall():
    g = generate("erdos-renyi", n=32, p=0.3, seed=3)
    fw = floyd_warshall(g)
    d = bfs_distances(g, 0)
    assert all(d[v] == fw[(0, v)] for v in g.nodes)


def test_bfs_unknown_source():
    g = generate("path", n=3)
    with pytest.raises(GraphError):
        bfs_distances(g, 99)


def test_apsp_oracle_basics():
    g = generate("path", n=3)
    t = apsp_oracle(g)
    assert t[(0, 2)] == 2
    g2 = generate("grid", rows=4, cols=4)
    t2 = apsp_oracle(g2)
    assert all(t2[(v, v)] == 0 for v in g2.nodes)
    assert t2[(0, 15)] == 6
    assert all(t2[(u, v)] == t2[(v, u)] for u in g2.nodes for v in g2.nodes)


def test_mst_triangle():
    g = Graph([0, 1, 2], [(0, 1), (1, 2), (0, 2)], {(0, 1): 1, (1, 2): 2, (0, 2): 3})
    assert mst_oracle(g) == frozenset({(0, 1), (1, 2)})


def test_mst_path_is_own_tree():
    g = generate("path", n=5, weighted=True, seed=9)
    assert mst_oracle(g) == frozenset(g.edges)


def test_mst_duplicate_weights_rejected():
    g = Graph([0, 1, 2], [(0, 1), (1, 2), (0, 2)], {(0, 1): 1, (1, 2): 1, (0, 2): 3})
    with pytest.raises(GraphError, match="duplicate"):
        mst_oracle(g)


def spanning_trees(g):
    for combo in itertools.combinations(g.edges, g.n - 1):
        sub = Graph(g.nodes, combo, check_connected=False)
        if sub.is_connected():
            yield combo


def test_mst_brute_force_small():
    g = generate("erdos-renyi", n=8, p=0.45, seed=5, weighted=True)
    best = min(sum(g.weights[e] for e in t) for t in spanning_trees(g))
    got = sum(g.weights[e] for e in mst_oracle(g))
    assert got == best


def test_mst_below_random_spanning_trees():
    g = generate("erdos-renyi", n=24, p=0.25, seed=11, weighted=True)
    mst_weight = sum(g.weights[e] for e in mst_oracle(g))
    rng = random.Random(42)
    for _ in range(25):
        edges = list(g.edges)
        rng.shuffle(edges)
        # random spanning tree via arbitrary-order Kruskal
        from congestbench.oracles import UnionFind

        uf = UnionFind(g.nodes)
        tree = [e for e in edges if uf.union(*e)]
        assert mst_weight <= sum(g.weights[e] for e in tree)


def hop_bellman_ford(g, source, h):
    """Reference h-iteration Bellman-Ford, written independently."""
    best = {v: None for v in g.nodes}
    best[source] = 0
    for _ in range(h):
        nxt = dict(best)
        for u, v in g.edges:
            w = g.weight(u, v) if g.weighted else 1
            for a, b in ((u, v), (v, u)):
                if best[a] is not None:
                    cand = best[a] + w
                    if nxt[b] is None or cand < nxt[b]:
                        nxt[b] = cand
        best = nxt
    return best


def test_hop_limited_path_examples():
    g = generate("path", n=4)
    d1 = hop_limited_distances(g, {0}, 1)
    assert d1[(0, 2)] is None
    d3 = hop_limited_distances(g, {0}, 3)
    assert d3[(0, 3)] == 3


def test_hop_limited_matches_bellman_ford():
    g = generate("grid", rows=3, cols=3)
    corner = 0
    got = hop_limited_distances(g, {corner}, 2)
    ref = hop_bellman_ford(g, corner, 2)
    assert all(got[(corner, v)] == ref[v] for v in g.nodes)


def test_hop_limited_weighted_matches_bellman_ford():
    g = generate("erdos-renyi", n=12, p=0.35, seed=2)
    rng = random.Random(7)
    weights = {e: rng.randint(1, 8) for e in g.edges}
    gw = Graph(g.nodes, g.edges, weights)
    for h in (1, 2, 4):
        got = hop_limited_distances(gw, {0}, h)
        ref = hop_bellman_ford(gw, 0, h)
        assert all(got[(0, v)] == ref[v] for v in gw.nodes)


def test_hop_limited_monotone_and_converged():
    g = generate("erdos-renyi", n=20, p=0.25, seed=6)
    tables = [hop_limited_distances(g, {0, 5}, h) for h in range(0, 6)]
    for lo, hi in zip(tables, tables[1:]):
        for key, d in lo.items():
            if d is not None:
                assert hi[key] is not None and hi[key] <= d
    full = hop_limited_distances(g, {0}, g.n - 1)
    exact = bfs_distances(g, 0)
    assert all(full[(0, v)] == exact[v] for v in g.nodes)


def test_follow_pointer_chain():
    ov = DirectedOverlay(range(5), [(0, 1), (1, 2), (2, 0), (3, 4)])
    assert follow_pointer_chain(ov, 0, 2) == 2
    assert follow_pointer_chain(ov, 0, 3) is None  # cycles back to 0
    assert follow_pointer_chain(ov, 3, 1) == 4
    assert follow_pointer_chain(ov, 3, 2) is None  # chain ends
