"""Distributed MST: controlled Boruvka fragments, then a bandwidth-scaled
pipelined convergecast of inter-fragment candidate edges.

With k = round(sqrt(n/X)) the fragment phase stops a fragment's own merge
proposals once it holds k+1 members, leaving at most n/(k+1) fragments
(or a single spanning one) whose internal edges are all MST edges. The pipeline then streams candidate edges up a
BFS tree in non-decreasing weight order, floor(X/5) five-word edges per
round, filtering anything that closes a cycle over fragment ids; the root
finishes with Kruskal and downcasts the chosen edges.

The counting argument behind the pipeline's throughput is enforced at
runtime: a streaming node must always be able to emit at least
min(floor(X/5), received_from(child) - already_sent) fresh candidates,
and a shortfall raises MstStallError.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

from .engine import (
    BandwidthConfig,
    EngineError,
    NodeProgram,
    RunTrace,
    run,
)
from .graphs import Graph, GraphError
from .oracles import UnionFind
from .primitives import TreeInfo, build_bfs_tree

EDGE_WORDS = 5  # (weight, u, v, frag_u, frag_v)


class MstStallError(EngineError):
    """The pipeline could not emit the candidates the counting bound promises."""


@dataclass(frozen=True)
class FragmentState:
    """One node's view of its fragment after (part of) the fragment phase."""

    frag_id: int
    parent: int | None  # neighbor toward the fragment leader
    children: tuple[int, ...]
    chosen: frozenset[tuple[int, int]]  # incident MST edges picked so far
    neighbor_frag: dict[int, int] = field(default_factory=dict)


def mst_parameter(n: int, x: int) -> int:
    return max(1, round(math.sqrt(n / x)))


def _check_cfg(g: Graph, cfg: BandwidthConfig) -> int:
    if cfg.mode != "strict":
        raise GraphError("MST runs in strict mode")
    if not g.weighted:
        raise GraphError("MST needs a weighted graph")
    ws = list(g.weights.values())
    if len(set(ws)) != len(ws):
        raise GraphError("edge weights must be pairwise distinct")
    rc = cfg.resolve(g)
    if rc.words_per_round < EDGE_WORDS:
        raise GraphError(
            f"MST pipeline needs X >= {EDGE_WORDS} words per round, got "
            f"{rc.words_per_round}"
        )
    return rc.words_per_round


# ---------------------------------------------------------------------------
# Fragment phase: ceil(log2(k+1)) superphases, each one id-exchange run,
# one minimum-outgoing-edge run, one merge run. Runs are self-timed; the
# driver carries each node's state from one run to the next.
# ---------------------------------------------------------------------------


class _IdExchangeNode(NodeProgram):
    def __init__(self, ctx):
        super().__init__(ctx)
        self.state: FragmentState = ctx.local_input
        self.heard = {}

    def on_round(self, r, inbox):
        for env in inbox:
            self.heard[env.src] = env.payload[1]
        if r == 0:
            return (
                [self.send(u, ("fid", self.state.frag_id), 1) for u in self.ctx.neighbors],
                False,
            )
        return [], len(self.heard) == len(self.ctx.neighbors)

    def output(self):
        return replace(self.state, neighbor_frag=dict(self.heard))


class _MoeNode(NodeProgram):
    """Convergecast (size, lightest outgoing edge) to the fragment leader,
    which proposes that edge iff the fragment holds fewer than k+1 members."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.state, self.k, self.weights = ctx.local_input
        self.reports = {}
        self.sent_up = False
        self.decision = None  # (u, v) or "keep"

    def _local_best(self):
        s = self.state
        best = None
        for u in self.ctx.neighbors:
            if s.neighbor_frag[u] != s.frag_id:
                cand = (self.weights[u], self.ctx.node, u)
                if best is None or cand < best:
                    best = cand
        return best

    def on_round(self, r, inbox):
        for env in inbox:
            kind = env.payload[0]
            if kind == "moe":
                _, size, w, u, v = env.payload
                edge = None if w == 0 else (w, u, v)
                self.reports[env.src] = (size, edge)
            elif kind == "dec":
                _, flag, u, v = env.payload
                self.decision = (u, v) if flag else "keep"

        out = []
        s = self.state
        if not self.sent_up and len(self.reports) == len(s.children):
            self.sent_up = True
            size = 1 + sum(sz for sz, _ in self.reports.values())
            best = self._local_best()
            for _sz, edge in self.reports.values():
                if edge is not None and (best is None or edge < best):
                    best = edge
            if s.parent is not None:
                w, u, v = best if best is not None else (0, 0, 0)
                out.append(self.send(s.parent, ("moe", size, w, u, v), 4))
            else:
                propose = size < self.k + 1 and best is not None
                self.decision = (best[1], best[2]) if propose else "keep"
        if self.decision is not None and self.sent_up:
            flag, u, v = (
                (1, *self.decision) if self.decision != "keep" else (0, 0, 0)
            )
            down = [self.send(c, ("dec", flag, u, v), 3) for c in s.children]
            return out + down, True
        return out, False

    def output(self):
        proposed = self.decision != "keep"
        mine = proposed and self.decision[0] == self.ctx.node
        return self.state, (self.decision if mine else None), proposed


class _MergeNode(NodeProgram):
    """Resolve the proposal digraph and rebuild fragment trees.

    All proposals cross their edges in round 0. Each merge component is a
    set of old fragments whose proposal arcs either chain into one
    non-proposing fragment (which keeps its id) or meet in a mutual pair
    on the component's lightest edge (the smaller fragment id wins; the
    weight argument makes longer proposal cycles impossible). The winning
    id then floods outward over old tree edges and confirmed proposal
    edges; a node whose id changed reroots toward the flood sender.
    """

    def __init__(self, ctx):
        super().__init__(ctx)
        self.state, self.proposal, self.frag_proposed = ctx.local_input
        s = self.state
        self.frag_id = s.frag_id
        self.parent = s.parent
        self.tree_nbrs = set(s.children) | (
            {s.parent} if s.parent is not None else set()
        )
        self.chosen = set(s.chosen)
        self.pending: list[int] = []  # proposers awaiting my confirmed id
        self.resolved: int | None = None

    def _resolve(self, new_id, learned_from, out, forward_tree=True):
        self.resolved = new_id
        forward = sorted(self.tree_nbrs - {learned_from}) if forward_tree else []
        if learned_from is not None:
            if new_id != self.frag_id:
                self.parent = learned_from
            self.tree_nbrs.add(learned_from)
        for u in forward:
            out.append(self.send(u, ("nid", new_id), 1))
        self.frag_id = new_id
        for src in self.pending:
            out.append(self.send(src, ("nid", new_id), 1))
            self.tree_nbrs.add(src)
        self.pending = []

    def on_round(self, r, inbox):
        out = []
        if r == 0:
            if self.proposal is not None:
                u, v = self.proposal
                self.chosen.add((min(u, v), max(u, v)))
                out.append(self.send(v, ("prop", self.frag_id), 1))
            return out, False

        mutual = None
        for env in inbox:
            kind = env.payload[0]
            if kind == "prop":
                e = (min(self.ctx.node, env.src), max(self.ctx.node, env.src))
                self.chosen.add(e)
                if self.proposal is not None and env.src == self.proposal[1]:
                    mutual = env.payload[1]
                else:
                    self.pending.append(env.src)
            elif kind == "nid" and self.resolved is None:
                self._resolve(env.payload[1], env.src, out)

        if self.resolved is None:
            if not self.frag_proposed:
                self._resolve(self.frag_id, None, out, forward_tree=False)
            elif mutual is not None:
                winner = min(self.frag_id, mutual)
                learned_from = self.proposal[1] if winner != self.frag_id else None
                if winner == self.frag_id:
                    self.tree_nbrs.add(self.proposal[1])
                self._resolve(winner, learned_from, out)
        elif self.pending:
            for src in self.pending:
                out.append(self.send(src, ("nid", self.resolved), 1))
                self.tree_nbrs.add(src)
            self.pending = []

        return out, self.resolved is not None and not self.pending

    def output(self):
        drop = {self.parent} if self.parent is not None else set()
        return FragmentState(
            frag_id=self.frag_id,
            parent=self.parent,
            children=tuple(sorted(self.tree_nbrs - drop)),
            chosen=frozenset(self.chosen),
            neighbor_frag={},
        )


def fragment_phase(
    g: Graph, k: int, cfg: BandwidthConfig, seed: int = 0
) -> tuple[dict[int, FragmentState], RunTrace]:
    """Grow MST fragments until each holds at least k+1 nodes (or one is left).

    ceil(log2(k+1)) Boruvka superphases; in each, only fragments smaller
    than k+1 propose their lightest outgoing edge. Returns every node's
    fragment state with neighbor fragment ids refreshed, plus the combined
    trace of all the runs.
    """
    if k < 1:
        raise GraphError("fragment parameter k must be >= 1")
    _check_cfg(g, cfg)
    weights = {v: {u: g.weight(v, u) for u in g.neighbors(v)} for v in g.nodes}
    states = {
        v: FragmentState(v, None, (), frozenset(), {}) for v in g.nodes
    }
    trace: RunTrace | None = None

    def chain(t):
        nonlocal trace
        trace = t if trace is None else trace.concat(t)

    rounds_budget = 8 * g.n + 64
    for _ in range(math.ceil(math.log2(k + 1))):
        states, t1 = run(
            g, _IdExchangeNode, states, cfg, seed=seed, max_rounds=8
        )
        chain(t1)
        moe_inputs = {v: (states[v], k, weights[v]) for v in g.nodes}
        moe_out, t2 = run(
            g, _MoeNode, moe_inputs, cfg, seed=seed, max_rounds=rounds_budget
        )
        chain(t2)
        merge_inputs = {v: moe_out[v] for v in g.nodes}
        states, t3 = run(
            g, _MergeNode, merge_inputs, cfg, seed=seed, max_rounds=rounds_budget
        )
        chain(t3)

    states, t4 = run(g, _IdExchangeNode, states, cfg, seed=seed, max_rounds=8)
    chain(t4)
    return states, trace


# ---------------------------------------------------------------------------
# Pipeline: stream inter-fragment candidates up the BFS tree.
# ---------------------------------------------------------------------------


class _PipelineNode(NodeProgram):
    """Upcast the lightest cycle-free candidate edges, floor(X/5) per round.

    The cycle test runs over fragment ids, seeded with everything already
    sent plus the batch being assembled. Done markers travel alone once
    the pool is exhausted and all children reported done.
    """

    def __init__(self, ctx):
        super().__init__(ctx)
        tree, pool, batch_size = ctx.local_input
        self.parent = tree.parent
        self.children = set(tree.children)
        self.pool = sorted(pool)  # (w, u, v, fu, fv)
        self.batch_size = batch_size
        self.started = not self.children
        self.heard_from: set[int] = set()
        self.children_done: set[int] = set()
        self.received: dict[int, int] = {c: 0 for c in self.children}
        self.collected: list[tuple] = []  # root only
        self.uf_parent: dict[int, int] = {}
        self.sent_count = 0
        self.done_sent = False
        self.done_pending = False

    def _find(self, x):
        p = self.uf_parent
        root = x
        while p.get(root, root) != root:
            root = p[root]
        while p.get(x, x) != root:
            p[x], x = root, p[x]
        return root

    def _closes_cycle(self, fu, fv):
        a, b = self._find(fu), self._find(fv)
        if a == b:
            return True
        self.uf_parent[max(a, b)] = min(a, b)
        return False

    def on_round(self, r, inbox):
        for env in inbox:
            kind = env.payload[0]
            if kind == "e":
                _, w, u, v, fu, fv = env.payload
                self.heard_from.add(env.src)
                self.received[env.src] += 1
                self.pool.append((w, u, v, fu, fv))
                self.pool.sort()
            elif kind == "pdone":
                self.heard_from.add(env.src)
                self.children_done.add(env.src)
        if not self.started:
            self.started = self.heard_from == self.children
            if not self.started:
                return [], False

        if self.parent is None:
            # Root only collects; candidates stay in self.pool order.
            done = self.children_done == self.children
            return [], done

        if self.done_sent:
            return [], True

        sent_before = self.sent_count
        batch = []
        leftovers = []
        for cand in self.pool:
            if len(batch) == self.batch_size:
                leftovers.append(cand)
                continue
            if self._closes_cycle(cand[3], cand[4]):
                continue
            batch.append(cand)
        self.pool = leftovers
        self.sent_count += len(batch)

        # The adapted counting argument, enforced: whatever a child has
        # delivered beyond what this node already forwarded must be
        # available as fresh candidates right now.
        if len(batch) < self.batch_size:
            for c in self.children:
                owed = min(self.batch_size, self.received[c] - sent_before)
                if len(batch) < owed:
                    raise MstStallError(
                        f"node {self.ctx.node} round {r}: emitted {len(batch)} "
                        f"candidates but child {c} supplied {self.received[c]} "
                        f"against {sent_before} sent"
                    )

        out = [
            self.send(self.parent, ("e",) + cand, EDGE_WORDS) for cand in batch
        ]
        if not batch and not self.pool and self.children_done == self.children:
            out = [self.send(self.parent, ("pdone",), 1)]
            self.done_sent = True
        return out, self.done_sent

    def output(self):
        if self.parent is None:
            return tuple(self.pool)
        return self.sent_count


def pipeline_upcast(
    g: Graph,
    tree: dict[int, TreeInfo],
    fragments: dict[int, FragmentState],
    cfg: BandwidthConfig,
    seed: int = 0,
) -> tuple[tuple, RunTrace]:
    """Stream all useful inter-fragment edges to the BFS root.

    Returns the root's surviving candidate list (weight-sorted tuples
    (w, u, v, frag_u, frag_v)) and the pipeline trace.
    """
    x = _check_cfg(g, cfg)
    batch = x // EDGE_WORDS
    inputs = {}
    for v in g.nodes:
        st = fragments[v]
        pool = [
            (g.weight(v, u), v, u, st.frag_id, st.neighbor_frag[u])
            for u in g.neighbors(v)
            if st.neighbor_frag[u] != st.frag_id
        ]
        inputs[v] = (tree[v], pool, batch)
    n_frags = len({fragments[v].frag_id for v in g.nodes})
    budget = 4 * (g.n + (n_frags * 2 * g.m) // max(batch, 1)) + 64
    outputs, trace = run(
        g, _PipelineNode, inputs, cfg, seed=seed, max_rounds=budget
    )
    root = next(v for v in g.nodes if tree[v].parent is None)
    return outputs[root], trace


class _DowncastNode(NodeProgram):
    """Root streams the finally chosen inter-fragment edges down the tree."""

    def __init__(self, ctx):
        super().__init__(ctx)
        tree, edges, batch = ctx.local_input
        self.children = tree.children
        self.is_root = tree.parent is None
        self.batch = batch
        self.expect = None
        self.got: list[tuple] = []
        self.queues = {c: deque() for c in self.children}
        if self.is_root:
            self.expect = len(edges)
            self.got = list(edges)
            words = [("cnt", len(edges))] + [("e",) + e for e in edges]
            for c in self.children:
                self.queues[c].extend(words)

    def on_round(self, r, inbox):
        for env in inbox:
            if env.payload[0] == "cnt":
                self.expect = env.payload[1]
                for c in self.children:
                    self.queues[c].append(env.payload)
            else:
                self.got.append(env.payload[1:])
                for c in self.children:
                    self.queues[c].append(env.payload)

        out = []
        pending = False
        for c in self.children:
            q = self.queues[c]
            budget = self.ctx.words_per_round
            while q and budget >= (1 if q[0][0] == "cnt" else EDGE_WORDS):
                word_cost = 1 if q[0][0] == "cnt" else EDGE_WORDS
                out.append(self.send(c, q.popleft(), word_cost))
                budget -= word_cost
            if q:
                pending = True
        done = self.expect is not None and len(self.got) >= self.expect and not pending
        return out, done

    def output(self):
        return tuple(self.got)


def finalize_and_broadcast(
    g: Graph,
    tree: dict[int, TreeInfo],
    root_candidates,
    fragments: dict[int, FragmentState],
    cfg: BandwidthConfig,
    seed: int = 0,
) -> tuple[dict[int, frozenset], RunTrace]:
    """Kruskal over the root's candidates (components = fragment ids), then
    a pipelined downcast of the chosen edges.

    Returns each node's final incident MST edge set.
    """
    x = _check_cfg(g, cfg)
    frag_ids = {fragments[v].frag_id for v in g.nodes}
    uf = UnionFind(frag_ids)
    chosen = []
    for w, u, v, fu, fv in sorted(root_candidates):
        if uf.union(fu, fv):
            chosen.append((w, u, v, fu, fv))
    if len(chosen) != len(frag_ids) - 1:
        raise EngineError(
            "pipeline delivered too few candidates to connect all fragments"
        )
    inputs = {
        v: (tree[v], tuple(chosen) if tree[v].parent is None else (), x // EDGE_WORDS)
        for v in g.nodes
    }
    budget = 4 * (g.n + len(chosen) // max(x // EDGE_WORDS, 1)) + 64
    outputs, trace = run(g, _DowncastNode, inputs, cfg, seed=seed, max_rounds=budget)

    result = {}
    for v in g.nodes:
        mine = set(fragments[v].chosen)
        for _w, u, u2, _fu, _fv in outputs[v]:
            if v in (u, u2):
                mine.add((min(u, u2), max(u, u2)))
        result[v] = frozenset(mine)
    return result, trace


@dataclass(frozen=True)
class MstResult:
    edges_per_node: dict[int, frozenset]
    k: int
    fragment_count: int
    rounds_fragment: int  # Boruvka stand-in for the first phase
    rounds_pipeline: int  # upcast only
    rounds_finalize: int
    rounds_pipeline_path: int  # BFS tree + upcast + downcast composed
    trace: RunTrace

    @property
    def edge_union(self) -> frozenset[tuple[int, int]]:
        out = set()
        for es in self.edges_per_node.values():
            out |= es
        return frozenset(out)


def run_mst(g: Graph, cfg: BandwidthConfig, seed: int = 0) -> MstResult:
    """Full MST pipeline with k = round(sqrt(n/X)); output is the exact MST.

    rounds_pipeline_path isolates the bandwidth-scaled machinery (tree
    construction, candidate upcast, chosen-edge downcast); the fragment
    stand-in's rounds are reported separately since its internals replace
    an external procedure and carry no round guarantee of their own.
    """
    x = _check_cfg(g, cfg)
    k = mst_parameter(g.n, x)

    root = g.nodes[0]
    tree, t_tree = build_bfs_tree(g, root, cfg, seed=seed)
    fragments, t_frag = fragment_phase(g, k, cfg, seed=seed)
    frag_count = len({fragments[v].frag_id for v in g.nodes})

    root_pool, t_pipe = pipeline_upcast(g, tree, fragments, cfg, seed=seed)
    edges, t_final = finalize_and_broadcast(
        g, tree, root_pool, fragments, cfg, seed=seed
    )

    trace = t_tree.concat(t_frag).concat(t_pipe).concat(t_final)
    pipeline_path = t_tree.concat(t_pipe).concat(t_final).rounds_used
    return MstResult(
        edges_per_node=edges,
        k=k,
        fragment_count=frag_count,
        rounds_fragment=t_frag.rounds_executed,
        rounds_pipeline=t_pipe.rounds_used,
        rounds_finalize=t_final.rounds_used,
        rounds_pipeline_path=pipeline_path,
        trace=trace,
    )
