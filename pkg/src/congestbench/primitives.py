"""Shared node programs: BFS tree building, floods, convergecast, pair streams.

Everything here is word-granular so it works down to one word per round
per edge (X = 1). Message type tags ride along with each word and are not
billed separately.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import (
    BandwidthConfig,
    NodeContext,
    NodeProgram,
    RunTrace,
    TopologyError,
    run,
)
from .graphs import Graph


@dataclass(frozen=True)
class TreeInfo:
    """A rooted spanning tree as seen by one node."""

    parent: int | None
    depth: int
    children: tuple[int, ...]


class _BfsTreeNode(NodeProgram):
    """Flood one token from the root, then exchange child/not-child markers.

    First token arrival fixes parent (lowest sender id on ties) and depth;
    one marker per neighbor afterwards tells everyone its children.
    """

    def __init__(self, ctx: NodeContext):
        super().__init__(ctx)
        self.is_root = ctx.local_input == "root"
        self.depth = 0 if self.is_root else None
        self.parent = None
        self.arrival = 0 if self.is_root else None
        self.markers = {}
        self.token_sent = False
        self.markers_sent = False

    def on_round(self, r, inbox):
        out = []
        for env in inbox:
            kind = env.payload[0]
            if kind == "t" and self.arrival is None:
                self.arrival = r
                self.depth = env.payload[1] + 1
                self.parent = env.src
            elif kind == "m":
                self.markers[env.src] = env.payload[1]

        if self.arrival is not None and not self.token_sent:
            self.token_sent = True
            for u in self.ctx.neighbors:
                if u != self.parent:
                    out.append(self.send(u, ("t", self.depth), 1))
        elif self.arrival is not None and not self.markers_sent:
            self.markers_sent = True
            for u in self.ctx.neighbors:
                out.append(self.send(u, ("m", 1 if u == self.parent else 0), 1))

        done = self.markers_sent and len(self.markers) == len(self.ctx.neighbors)
        return out, done

    def output(self):
        children = tuple(sorted(u for u, flag in self.markers.items() if flag))
        return TreeInfo(self.parent, self.depth, children)


def build_bfs_tree(
    g: Graph, root: int, cfg: BandwidthConfig, seed: int = 0
) -> tuple[dict[int, TreeInfo], RunTrace]:
    """Grow a BFS tree from root; every node learns parent, depth, children.

    Completes within D + 4 rounds.
    """
    inputs = {root: "root"}
    return run(g, _BfsTreeNode, inputs, cfg, seed=seed, max_rounds=g.n + 8)


class _FloodNode(NodeProgram):
    """Pipelined broadcast of a fixed number of payload words from the root."""

    def __init__(self, ctx: NodeContext):
        super().__init__(ctx)
        role, self.total_words = ctx.local_input
        self.is_root = role == "root"
        self.depth = 0 if self.is_root else None
        self.parent = None
        self.got: list = []
        self.queues = {u: deque() for u in ctx.neighbors}
        if self.is_root:
            self.got = [("payload", i) for i in range(self.total_words)]
            for u in ctx.neighbors:
                self.queues[u].extend(self.got)

    def on_round(self, r, inbox):
        for env in inbox:
            if self.depth is None:
                self.depth = env.payload[0] + 1
                self.parent = env.src
            word = env.payload[1]
            if word not in self.got:
                self.got.append(word)
                for u in self.ctx.neighbors:
                    if u != self.parent:
                        self.queues[u].append(word)

        out = []
        pending = False
        for u in self.ctx.neighbors:
            q = self.queues[u]
            for _ in range(min(self.ctx.words_per_round, len(q))):
                out.append(self.send(u, (self.depth, q.popleft()), 1))
            if q:
                pending = True
        done = len(self.got) == self.total_words and not pending
        return out, done

    def output(self):
        return {"parent": self.parent, "depth": self.depth, "words": len(self.got)}


def broadcast_flood(
    g: Graph, root: int, payload_words: int, cfg: BandwidthConfig, seed: int = 0
) -> tuple[dict, RunTrace]:
    """BFS-flood payload_words words from root, pipelined at X words per round.

    Every node ends up with the payload plus its BFS parent and depth;
    rounds_used <= D + ceil(payload_words / X) + 1.
    """
    if payload_words < 1:
        raise ValueError("payload_words must be positive")
    inputs = {v: ("root" if v == root else "other", payload_words) for v in g.nodes}
    rc = cfg.resolve(g)
    budget = g.n + payload_words // max(rc.words_per_round, 1) + 8
    return run(g, _FloodNode, inputs, cfg, seed=seed, max_rounds=budget + g.n)


def validate_tree(g: Graph, parent: dict[int, int | None]) -> dict[int, int]:
    """Check that a parent map encodes a rooted spanning tree of g; return depths."""
    roots = [v for v in g.nodes if parent.get(v) is None]
    if set(parent) != set(g.nodes) or len(roots) != 1:
        raise TopologyError("parent map must cover every node with exactly one root")
    depth = {}
    for v in g.nodes:
        path = []
        x = v
        while x is not None and x not in depth:
            path.append(x)
            p = parent[x]
            if p is not None and not g.has_edge(x, p):
                raise TopologyError(f"tree edge ({x},{p}) not in graph")
            x = p
            if len(path) > g.n:
                raise TopologyError("cycle in parent map")
        base = 0 if x is None else depth[x] + 1
        for node in reversed(path):
            depth[node] = base
            base += 1
    return depth


class _ConvergecastNode(NodeProgram):
    """Leaf-to-root sum along a given tree; each node learns its subtree sum."""

    def __init__(self, ctx: NodeContext):
        super().__init__(ctx)
        self.parent, self.children, self.value = ctx.local_input
        self.reports = {}
        self.subtree = None

    def on_round(self, r, inbox):
        for env in inbox:
            self.reports[env.src] = env.payload[1]
        if self.subtree is None and len(self.reports) == len(self.children):
            self.subtree = self.value + sum(self.reports.values())
            if self.parent is not None:
                return [self.send(self.parent, ("sum", self.subtree), 1)], True
            return [], True
        return [], self.subtree is not None

    def output(self):
        return self.subtree


def convergecast_sum(
    g: Graph,
    tree_parent: dict[int, int | None],
    values: dict[int, int],
    cfg: BandwidthConfig,
    seed: int = 0,
) -> tuple[int, dict[int, int], RunTrace]:
    """Sum values up a rooted spanning tree.

    Returns (root total, per-node subtree sums, trace); completes within
    tree depth + 1 rounds.
    """
    depth = validate_tree(g, tree_parent)
    children: dict[int, list[int]] = {v: [] for v in g.nodes}
    for v, p in tree_parent.items():
        if p is not None:
            children[p].append(v)
    inputs = {
        v: (tree_parent[v], tuple(sorted(children[v])), values.get(v, 0))
        for v in g.nodes
    }
    outputs, trace = run(
        g, _ConvergecastNode, inputs, cfg, seed=seed, max_rounds=max(depth.values()) + 4
    )
    root = next(v for v in g.nodes if tree_parent[v] is None)
    return outputs[root], outputs, trace


class _PairBroadcastNode(NodeProgram):
    """Upcast (id, value) pairs along the tree, then downcast the full table.

    Pairs cost two words and are streamed word by word so any X >= 1 works.
    The downcast is prefixed with a count word; a done word closes each
    upcast channel.
    """

    def __init__(self, ctx: NodeContext):
        super().__init__(ctx)
        tree, contribution = ctx.local_input
        self.parent = tree.parent
        self.children = tree.children
        self.up = deque()
        if contribution is not None and self.parent is not None:
            self.up.extend([("p0", contribution[0]), ("p1", contribution[1])])
        self.children_done = set()
        self.up_done_sent = False
        self.table: dict[int, int] = {}
        if contribution is not None:
            self.table[contribution[0]] = contribution[1]
        self.partial: dict[int, int] = {}
        self.expect: int | None = None
        self.down = {c: deque() for c in self.children}
        self.down_loaded = False
        self.received_down = 0

    def _pump(self, out):
        budget = {u: self.ctx.words_per_round for u in self.ctx.neighbors}
        if self.parent is not None:
            q = self.up
            while q and budget[self.parent] > 0:
                out.append(self.send(self.parent, q.popleft(), 1))
                budget[self.parent] -= 1
            if (
                not q
                and not self.up_done_sent
                and self.children_done == set(self.children)
                and budget[self.parent] > 0
            ):
                out.append(self.send(self.parent, ("done",), 1))
                self.up_done_sent = True
        for c in self.children:
            q = self.down[c]
            while q and budget[c] > 0:
                out.append(self.send(c, q.popleft(), 1))
                budget[c] -= 1

    def _load_downcast(self):
        words = [("cnt", len(self.table))]
        for key in sorted(self.table):
            words.extend([("p0", key), ("p1", self.table[key])])
        for c in self.children:
            self.down[c].extend(words)
        self.down_loaded = True
        self.expect = len(self.table)
        self.received_down = len(self.table)

    def on_round(self, r, inbox):
        for env in inbox:
            kind = env.payload[0]
            if env.src == self.parent:
                if kind == "cnt":
                    self.expect = env.payload[1]
                elif kind == "p0":
                    self.partial[env.src] = env.payload[1]
                elif kind == "p1":
                    key = self.partial.pop(env.src)
                    self.table[key] = env.payload[1]
                    self.received_down += 1
                if kind != "done":
                    for c in self.children:
                        self.down[c].append(env.payload)
            else:
                if kind == "done":
                    self.children_done.add(env.src)
                elif kind == "p0":
                    self.partial[env.src] = env.payload[1]
                elif kind == "p1":
                    key = self.partial.pop(env.src)
                    if key not in self.table:
                        self.table[key] = env.payload[1]
                        if self.parent is not None:
                            self.up.extend([("p0", key), ("p1", env.payload[1])])

        if (
            self.parent is None
            and not self.down_loaded
            and self.children_done == set(self.children)
        ):
            self._load_downcast()

        out = []
        self._pump(out)
        done = (
            self.expect is not None
            and self.received_down >= self.expect
            and all(not q for q in self.down.values())
            and not self.up
            and (self.parent is None or self.up_done_sent)
        )
        return out, done

    def output(self):
        return dict(self.table)


def pair_broadcast(
    g: Graph,
    tree: dict[int, TreeInfo],
    contributions: dict[int, int],
    cfg: BandwidthConfig,
    seed: int = 0,
) -> tuple[dict[int, dict[int, int]], RunTrace]:
    """Every node ends up holding all (id, value) contributions.

    contributions maps contributing node -> one-word value; the pair's id
    word is the contributor's node id. Rounds <= 2*depth + 2*ceil(2K/X) + 4
    for K contributions.
    """
    rc = cfg.resolve(g)
    inputs = {
        v: (tree[v], (v, contributions[v]) if v in contributions else None)
        for v in g.nodes
    }
    k = len(contributions)
    budget = 2 * g.n + 4 * (2 * k // max(rc.words_per_round, 1) + 2) + 16
    return run(g, _PairBroadcastNode, inputs, cfg, seed=seed, max_rounds=budget)
