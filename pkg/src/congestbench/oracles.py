"""Centralized reference algorithms used for differential testing.

Every distributed algorithm in this package is checked against one of these.
Unreachable is reported as None, never as a sentinel integer.
"""

from __future__ import annotations

from collections import deque

from .graphs import Graph, GraphError

# (source, target) -> hop distance, None when unreachable
DistanceTable = dict[tuple[int, int], int | None]


def bfs_distances(g: Graph, source: int) -> dict[int, int]:
    """Exact unweighted hop distances from one source."""
    if source not in g._adj:
        raise GraphError(f"unknown source {source}")
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for w in g.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def apsp_oracle(g: Graph) -> DistanceTable:
    """All-pairs hop distances: bfs_distances from every source."""
    table: DistanceTable = {}
    for s in g.nodes:
        row = bfs_distances(g, s)
        for t in g.nodes:
            table[(s, t)] = row.get(t)
    return table


class UnionFind:
    """Union by size with path compression."""

    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def mst_oracle(g: Graph) -> frozenset[tuple[int, int]]:
    """The unique MST (Kruskal). Requires pairwise-distinct positive weights."""
    if not g.weighted:
        raise GraphError("mst_oracle needs a weighted graph")
    ws = list(g.weights.values())
    if len(set(ws)) != len(ws):
        raise GraphError("duplicate edge weights: MST would not be unique")
    uf = UnionFind(g.nodes)
    chosen = []
    for e in sorted(g.edges, key=lambda e: g.weights[e]):
        if uf.union(*e):
            chosen.append(e)
    return frozenset(chosen)


def hop_limited_distances(
    g: Graph, sources, h: int
) -> dict[tuple[int, int], int | None]:
    """d_h(s, v): cheapest path from s to v using at most h edges.

    Unweighted edges count 1 each; weighted graphs use their weights while
    the hop budget still counts edges. h-iteration Bellman-Ford.
    """
    if h < 0:
        raise GraphError("hop budget must be non-negative")
    out: dict[tuple[int, int], int | None] = {}
    for s in sorted(set(sources)):
        if s not in g._adj:
            raise GraphError(f"unknown source {s}")
        best: dict[int, int] = {s: 0}
        frontier = {s}
        for _ in range(h):
            improved = {}
            for u in frontier:
                du = best[u]
                for v in g.neighbors(u):
                    cand = du + (g.weight(u, v) if g.weighted else 1)
                    if cand < best.get(v, cand + 1) and cand < improved.get(
                        v, cand + 1
                    ):
                        improved[v] = cand
            frontier = set()
            for v, d in improved.items():
                if d < best.get(v, d + 1):
                    best[v] = d
                    frontier.add(v)
            if not frontier:
                break
        for v in g.nodes:
            out[(s, v)] = best.get(v)
    return out


def follow_pointer_chain(overlay, start: int, k: int) -> int | None:
    """Walk k arcs from start in an out-degree<=1 overlay; None if it ends early.

    The walk stops early also when it revisits a node (no node sits at
    shortest-path distance k then).
    """
    if overlay.max_out_degree() > 1:
        raise GraphError("pointer chain needs out-degree <= 1")
    seen = {start}
    cur = start
    for _ in range(k):
        nxt = overlay.out_neighbors(cur)
        if not nxt:
            return None
        cur = nxt[0]
        if cur in seen:
            return None
        seen.add(cur)
    return cur
