"""SSSP building blocks: skeleton sampling, Broadcast-Congested-Clique round
emulation over a BFS tree, and bounded-hop multi-source shortest paths with
random start delays.

The end-to-end approximate-SSSP pipeline is intentionally not assembled
here; these are its two bandwidth-scaled ingredients exposed with their
own contracts, plus the sampler that stands in for the overlay
construction they would plug into.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .engine import BandwidthConfig, NodeProgram, RunTrace, run
from .graphs import Graph, GraphError
from .primitives import build_bfs_tree, pair_broadcast

MSSP_MSG_WORDS = 3  # (source, distance, hops)


@dataclass(frozen=True)
class SkeletonSet:
    """Sampled node subset standing in for an overlay's vertex set."""

    members: frozenset[int]
    source: int
    alpha: int

    def __len__(self):
        return len(self.members)


def sample_skeleton(g: Graph, s: int, alpha: int, seed: int = 0) -> SkeletonSet:
    """Uniform sample of exactly alpha nodes, always containing s."""
    if s not in g._adj:
        raise GraphError(f"unknown source {s}")
    if not 1 <= alpha <= g.n:
        raise GraphError(f"alpha must be in [1, {g.n}]")
    rng = random.Random(f"skeleton/{seed}")
    rest = [v for v in g.nodes if v != s]
    members = frozenset([s] + rng.sample(rest, alpha - 1))
    return SkeletonSet(members, s, alpha)


def emulate_bcc_round(
    g: Graph,
    skeleton: SkeletonSet,
    values: dict[int, int],
    cfg: BandwidthConfig,
    seed: int = 0,
    tree=None,
) -> tuple[dict[int, dict[int, int]], RunTrace]:
    """One Broadcast-Congested-Clique round: every node learns every
    skeleton node's one-word value.

    Pipelined pair upcast/downcast on a BFS tree; with K = |skeleton| the
    run takes at most 2D + 2*ceil(2K/X) + 4 rounds. The returned trace
    covers only the emulation; tree construction (built here if not
    supplied) is setup outside the bound.
    """
    if set(values) != set(skeleton.members):
        raise GraphError("need exactly one value per skeleton node")
    if tree is None:
        tree, _ = build_bfs_tree(g, g.nodes[0], cfg, seed=seed)
    return pair_broadcast(g, tree, values, cfg, seed=seed)


def predicted_delay_interval(k: int, n: int, capacity_bits: int) -> int:
    """Delay-interval width for staggering k concurrent executions."""
    if k < 1 or n < 2 or capacity_bits < 1:
        raise GraphError("arguments must be positive")
    log_n = math.log2(n)
    if capacity_bits < log_n:
        raise GraphError(
            f"capacity {capacity_bits} bits is below log2(n) = {log_n:.2f}; "
            "outside the staggering regime"
        )
    return math.ceil(k * log_n**2 / capacity_bits)


@dataclass(frozen=True)
class MsspResult:
    distances: dict[int, dict[int, int | None]]  # node -> source -> d_h
    delays: dict[int, int]
    delta: int
    halt_round: int
    max_edge_words: int
    overflow_words: int
    messages_per_source_node: int  # max broadcasts for one (source, node)
    trace: RunTrace


class _BoundedHopNode(NodeProgram):
    """Per-source distance-improvement broadcasts with delayed starts.

    Messages carry (source, distance, hops); a node tracks, per source,
    the best distance for every hop budget up to h and re-broadcasts each
    Pareto improvement. All nodes halt at a pre-agreed round.
    """

    def __init__(self, ctx):
        super().__init__(ctx)
        inp = ctx.local_input
        self.h = inp["h"]
        self.halt_at = inp["halt_round"]
        self.delay = inp.get("delay")  # None unless this node is a source
        self.weights = inp["weights"]  # neighbor -> edge weight
        self.best: dict[int, list] = {}
        self.sent_counts: dict[int, int] = {}
        self.outgoing: list = []
        self.started = False

    def _improve(self, src, dist, hops):
        """Returns True when (dist, hops) tightened the table."""
        table = self.best.get(src)
        if table is None:
            table = [None] * (self.h + 1)
            self.best[src] = table
        changed = False
        for j in range(hops, self.h + 1):
            if table[j] is None or dist < table[j]:
                table[j] = dist
                changed = True
        return changed

    def on_round(self, r, inbox):
        broadcasts = []
        if self.delay is not None and not self.started and r >= self.delay:
            self.started = True
            self._improve(self.ctx.node, 0, 0)
            broadcasts.append((self.ctx.node, 0, 0))
        for env in inbox:
            src, dist, hops = env.payload
            if hops + 1 > self.h:
                continue
            cand = dist + self.weights[env.src]
            if self._improve(src, cand, hops + 1):
                broadcasts.append((src, cand, hops + 1))

        out = []
        for msg in broadcasts:
            self.sent_counts[msg[0]] = self.sent_counts.get(msg[0], 0) + 1
            for u in self.ctx.neighbors:
                out.append(self.send(u, msg, MSSP_MSG_WORDS))
        return out, r >= self.halt_at

    def output(self):
        dist = {src: table[self.h] for src, table in self.best.items()}
        return dist, dict(self.sent_counts)


def bounded_hop_mssp(
    g: Graph,
    skeleton: SkeletonSet,
    h: int,
    cfg: BandwidthConfig,
    seed: int = 0,
    delta: int | None = None,
) -> MsspResult:
    """Exact h-hop distances from every skeleton node, in queue mode.

    Each source starts its broadcast after a random delay from {0..delta};
    queueing can stretch timing but never corrupts values. All nodes stop
    at 2*(delta + h + D) + 8 rounds, far past quiescence.
    """
    if cfg.mode != "queue":
        raise GraphError("bounded_hop_mssp requires queue mode")
    if h < 1:
        raise GraphError("hop budget must be >= 1")
    rc = cfg.resolve(g)
    if rc.words_per_round < MSSP_MSG_WORDS:
        raise GraphError(f"need X >= {MSSP_MSG_WORDS} for (source, dist, hops) messages")
    if delta is None:
        delta = predicted_delay_interval(len(skeleton), g.n, rc.capacity_bits)

    rng = random.Random(f"mssp-delays/{seed}")
    delays = {s: rng.randint(0, delta) for s in sorted(skeleton.members)}
    diameter = g.diameter()
    halt_round = 2 * (delta + h + diameter) + 8

    inputs = {}
    for v in g.nodes:
        inputs[v] = {
            "h": h,
            "halt_round": halt_round,
            "delay": delays.get(v),
            "weights": {
                u: (g.weight(v, u) if g.weighted else 1) for u in g.neighbors(v)
            },
        }
    outputs, trace = run(
        g, _BoundedHopNode, inputs, cfg, seed=seed, max_rounds=halt_round + g.n + 8
    )

    distances = {}
    max_msgs = 0
    for v in g.nodes:
        dist, counts = outputs[v]
        full = {s: dist.get(s) for s in skeleton.members}
        distances[v] = full
        if counts:
            max_msgs = max(max_msgs, max(counts.values()))

    return MsspResult(
        distances=distances,
        delays=delays,
        delta=delta,
        halt_round=halt_round,
        max_edge_words=_max_emitted_words(trace, rc.word_bits),
        overflow_words=trace.overflow_words(rc.word_bits),
        messages_per_source_node=max_msgs,
        trace=trace,
    )


def _max_emitted_words(trace: RunTrace, word_bits: int) -> int:
    """Peak words pushed into one (edge, direction) in a single round."""
    prev_backlog: dict[tuple, int] = {}
    peak = 0
    for _r, u, v, d, bits, backlog in trace.rows:
        key = (u, v, d)
        emitted = bits + backlog - prev_backlog.get(key, 0)
        prev_backlog[key] = backlog
        peak = max(peak, emitted)
    return peak // word_bits
