"""Undirected communication graphs, directed overlays, generators, and text I/O.

Node IDs are arbitrary distinct non-negative integers (not necessarily
contiguous); generated graphs use 0..n-1, reduction instances use 1..n.
"""

from __future__ import annotations

import math
import random
from collections import deque


class GraphError(ValueError):
    """Malformed graph, overlay, or generator parameters."""


class Graph:
    """Connected simple undirected graph with optional distinct integer weights."""

    def __init__(self, nodes, edges, weights=None, check_connected=True):
        node_list = list(nodes)
        self.nodes: tuple[int, ...] = tuple(sorted(set(node_list)))
        if len(self.nodes) != len(node_list):
            raise GraphError("duplicate node ids")
        if any(v < 0 for v in self.nodes):
            raise GraphError("node ids must be non-negative")
        node_set = set(self.nodes)

        norm = []
        seen = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u},{v}) references unknown node")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise GraphError(f"parallel edge {e}")
            seen.add(e)
            norm.append(e)
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(norm))

        self.weights: dict[tuple[int, int], int] | None = None
        if weights is not None:
            w = {}
            for (u, v), wt in weights.items():
                e = (u, v) if u < v else (v, u)
                if e not in seen:
                    raise GraphError(f"weight for non-edge {e}")
                if not isinstance(wt, int) or wt <= 0:
                    raise GraphError(f"weight for {e} must be a positive integer")
                w[e] = wt
            if set(w) != seen:
                raise GraphError("weights must cover every edge")
            self.weights = w

        self._adj: dict[int, tuple[int, ...]] = {v: () for v in self.nodes}
        adj_build: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj_build[u].append(v)
            adj_build[v].append(u)
        for v in self.nodes:
            self._adj[v] = tuple(sorted(adj_build[v]))

        if check_connected and not self.is_connected():
            raise GraphError("graph is not connected")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_id(self) -> int:
        return self.nodes[-1]

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        e = (u, v) if u < v else (v, u)
        return e in self._edge_set

    @property
    def _edge_set(self):
        es = getattr(self, "_edge_set_cache", None)
        if es is None:
            es = frozenset(self.edges)
            self._edge_set_cache = es
        return es

    def weight(self, u: int, v: int) -> int:
        if self.weights is None:
            raise GraphError("graph is unweighted")
        e = (u, v) if u < v else (v, u)
        return self.weights[e]

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        seen = {self.nodes[0]}
        q = deque([self.nodes[0]])
        while q:
            u = q.popleft()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
        return len(seen) == len(self.nodes)

    def diameter(self) -> int:
        """Exact hop diameter (BFS from every node)."""
        best = 0
        for s in self.nodes:
            dist = {s: 0}
            q = deque([s])
            while q:
                u = q.popleft()
                for w in self._adj[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        q.append(w)
            best = max(best, max(dist.values()))
        return best

    def word_bits(self) -> int:
        """Bits needed to store any node id: ceil(log2(maxId+1))."""
        return max(1, math.ceil(math.log2(self.max_id + 1)))

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.nodes == other.nodes
            and self.edges == other.edges
            and self.weights == other.weights
        )

    def __repr__(self):
        kind = "weighted" if self.weighted else "unweighted"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


class DirectedOverlay:
    """Directed arc set over the nodes of a base graph (the G' of Distance_k)."""

    def __init__(self, nodes, arcs):
        self.nodes = tuple(sorted(set(nodes)))
        node_set = set(self.nodes)
        out: dict[int, set[int]] = {v: set() for v in self.nodes}
        for u, v in arcs:
            if u not in node_set or v not in node_set:
                raise GraphError(f"arc ({u},{v}) references unknown node")
            out[u].add(v)
        self._out = {v: tuple(sorted(out[v])) for v in self.nodes}

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    @property
    def arcs(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u in self.nodes for v in self._out[u])

    def max_out_degree(self) -> int:
        return max((len(self._out[v]) for v in self.nodes), default=0)


# ---------------------------------------------------------------------------
# Generators. Same (kind, seed) always yields the identical graph.
# ---------------------------------------------------------------------------

WEIGHT_BOUND_EXP = 3  # weights drawn from [1, n**3]
_CONNECT_RETRIES = 200


def _distinct_weights(edges, n, rng: random.Random):
    hi = max(n, 2) ** WEIGHT_BOUND_EXP
    ws = rng.sample(range(1, hi + 1), len(edges))
    return dict(zip(sorted(edges), ws))


def generate(kind: str, seed: int = 0, weighted: bool = False, **params) -> Graph:
    """Build a connected instance of the given family.

    Kinds: path(n), star(n), grid(rows, cols), erdos-renyi(n, p),
    tree-plus-chords(n, chords).
    """
    rng = random.Random(f"gen/{kind}/{seed}")
    if kind == "path":
        n = _positive(params, "n")
        edges = [(i, i + 1) for i in range(n - 1)]
        nodes = range(n)
    elif kind == "star":
        n = _positive(params, "n")
        if n < 2:
            raise GraphError("star needs n >= 2")
        edges = [(0, i) for i in range(1, n)]
        nodes = range(n)
    elif kind == "grid":
        rows = _positive(params, "rows")
        cols = _positive(params, "cols")
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
        nodes = range(rows * cols)
    elif kind == "erdos-renyi":
        n = _positive(params, "n")
        p = params.get("p")
        if p is None or not (0 < p <= 1):
            raise GraphError("erdos-renyi needs p in (0, 1]")
        nodes = range(n)
        edges = None
        for attempt in range(_CONNECT_RETRIES):
            trial = [
                (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
            ]
            g = Graph(nodes, trial, check_connected=False)
            if g.is_connected():
                edges = trial
                break
        if edges is None:
            raise GraphError(
                f"erdos-renyi(n={n}, p={p}) not connected after "
                f"{_CONNECT_RETRIES} retries"
            )
    elif kind == "tree-plus-chords":
        n = _positive(params, "n")
        chords = params.get("chords", 0)
        if chords < 0:
            raise GraphError("chords must be non-negative")
        nodes = range(n)
        edges = [(rng.randrange(i), i) for i in range(1, n)]
        present = {tuple(sorted(e)) for e in edges}
        missing = [
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if (u, v) not in present
        ]
        for e in rng.sample(missing, min(chords, len(missing))):
            edges.append(e)
    else:
        raise GraphError(f"unknown graph kind {kind!r}")

    weights = _distinct_weights(edges, len(tuple(nodes)), rng) if weighted else None
    return Graph(nodes, edges, weights)


def _positive(params, key):
    val = params.get(key)
    if not isinstance(val, int) or val <= 0:
        raise GraphError(f"parameter {key!r} must be a positive integer")
    return val


# ---------------------------------------------------------------------------
# Text formats.
#
# Graph:   line 1 "n m [weighted]", then m lines "u v [w]" with u < v,
#          sorted lexicographically. Decimal ASCII, LF endings.
# Overlay: line 1 "n a", then a lines "u v" meaning arc u -> v.
# ---------------------------------------------------------------------------


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(graph_to_text(g))


def graph_to_text(g: Graph) -> str:
    head = f"{g.n} {g.m} weighted" if g.weighted else f"{g.n} {g.m}"
    lines = [head]
    for u, v in g.edges:
        if g.weighted:
            lines.append(f"{u} {v} {g.weights[(u, v)]}")
        else:
            lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


def load_graph(path) -> Graph:
    with open(path, "r", encoding="ascii") as f:
        return graph_from_text(f.read())


def graph_from_text(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphError("empty graph file")
    head = lines[0].split()
    if len(head) not in (2, 3) or (len(head) == 3 and head[2] != "weighted"):
        raise GraphError(f"bad header {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    weighted = len(head) == 3
    if len(lines) - 1 != m:
        raise GraphError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges, weights = [], {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != (3 if weighted else 2):
            raise GraphError(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not u < v:
            raise GraphError(f"edge line {ln!r} must have u < v")
        edges.append((u, v))
        if weighted:
            weights[(u, v)] = int(parts[2])
    nodes = sorted({x for e in edges for x in e})
    if len(nodes) != n:
        raise GraphError(f"header says n={n} but edges span {len(nodes)} nodes")
    return Graph(nodes, edges, weights if weighted else None)


def save_overlay(overlay: DirectedOverlay, path) -> None:
    arcs = overlay.arcs
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(f"{len(overlay.nodes)} {len(arcs)}\n")
        for u, v in arcs:
            f.write(f"{u} {v}\n")


def load_overlay(path, nodes) -> DirectedOverlay:
    with open(path, "r", encoding="ascii") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    head = lines[0].split()
    n, a = int(head[0]), int(head[1])
    if len(lines) - 1 != a:
        raise GraphError(f"expected {a} arc lines, found {len(lines) - 1}")
    arcs = []
    for ln in lines[1:]:
        u, v = map(int, ln.split())
        arcs.append((u, v))
    if len(tuple(nodes)) != n:
        raise GraphError(f"overlay header n={n} does not match base node count")
    return DirectedOverlay(nodes, arcs)
