"""The Distance_k problem: barrier-synchronized flood iterations, the
pointer-chasing reduction instances, and the bridge-edge bit meter.

Distance_k(u) asks for the node at directed overlay distance exactly k
from u. With overlay out-degree at most one there is a unique chain, and
one flood per chain step resolves it: the node that just learned its
distance broadcasts its overlay successor's id, the named node adopts the
next distance, and after k steps the winner announces itself. Every
iteration gets a fixed window of D+1 rounds, so the schedule never
depends on the bandwidth: the literal, measurable form of insensitivity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import BandwidthConfig, NodeProgram, RunTrace, measure_bits, run
from .graphs import DirectedOverlay, Graph, GraphError
from .oracles import follow_pointer_chain


@dataclass(frozen=True)
class PointerInstance:
    """Two lists of p pointers, each pointing into the other (1-based)."""

    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self):
        p = len(self.alice)
        if len(self.bob) != p or p < 1:
            raise GraphError("alice and bob need the same positive length")
        for side in (self.alice, self.bob):
            if any(not 1 <= ptr <= p for ptr in side):
                raise GraphError(f"pointers must lie in [1, {p}]")

    @property
    def p(self) -> int:
        return len(self.alice)


def random_pointer_instance(p: int, seed: int = 0) -> PointerInstance:
    rng = random.Random(f"pointer/{seed}")
    return PointerInstance(
        tuple(rng.randint(1, p) for _ in range(p)),
        tuple(rng.randint(1, p) for _ in range(p)),
    )


@dataclass(frozen=True)
class ReductionInstance:
    """Two hub-joined stars whose bridge edge mirrors the two-party channel."""

    graph: Graph
    overlay: DirectedOverlay
    pointers: PointerInstance
    left_hub: int
    right_hub: int

    @property
    def bridge(self) -> tuple[int, int]:
        return (self.left_hub, self.right_hub)

    @property
    def start(self) -> int:
        return 1


def build_reduction(pi: PointerInstance) -> ReductionInstance:
    """Encode a pointer instance as a Distance_k input.

    Left ids 1..p carry Alice's pointers, right ids p+1..2p Bob's; the
    hubs get ids 2p+1 and 2p+2. Alice's pointer i -> j becomes the arc
    i -> p+j, Bob's becomes p+i -> j, and the hubs point at each other.
    """
    p = pi.p
    left = range(1, p + 1)
    right = range(p + 1, 2 * p + 1)
    hub_l, hub_r = 2 * p + 1, 2 * p + 2
    edges = [(i, hub_l) for i in left]
    edges += [(j, hub_r) for j in right]
    edges.append((hub_l, hub_r))
    g = Graph(list(left) + list(right) + [hub_l, hub_r], edges)

    arcs = [(i, p + pi.alice[i - 1]) for i in left]
    arcs += [(p + i, pi.bob[i - 1]) for i in range(1, p + 1)]
    arcs += [(hub_l, hub_r), (hub_r, hub_l)]
    return ReductionInstance(g, DirectedOverlay(g.nodes, arcs), pi, hub_l, hub_r)


class _DistanceKNode(NodeProgram):
    """One flood window of D+1 rounds per chain step.

    A window with no traffic anywhere means the chain ended; every node
    observes the same silence and halts at the next boundary.
    """

    def __init__(self, ctx):
        super().__init__(ctx)
        inp = ctx.local_input
        self.succ = inp["succ"]  # overlay out-neighbor or None
        self.k = inp["k"]
        self.window = inp["diameter"] + 1
        self.dist = 0 if inp["is_source"] else None
        self.heard_window: set[int] = set()
        self.answer = None
        self.active_prev = True  # window -1 counts as active

    def on_round(self, r, inbox):
        w, phase = divmod(r, self.window)
        if phase == 0:
            if w > 0 and not self.active_prev:
                return [], True
            if w > self.k:
                return [], True
            self.active_prev = False
            self.heard_window = set()

        out = []
        suppress = (r + 1) % self.window == 0
        token = None
        sender = None
        if phase == 0 and self.dist == w:
            if w == self.k:
                token = self.ctx.node
            elif self.succ is not None:
                token = self.succ
        for env in inbox:
            if env.payload not in self.heard_window:
                token = env.payload
                sender = env.src
        if token is not None and token not in self.heard_window:
            self.heard_window.add(token)
            self.active_prev = True
            if w == self.k:
                self.answer = token
            elif token == self.ctx.node and self.dist is None:
                self.dist = w + 1
            if not suppress:
                for u in self.ctx.neighbors:
                    if u != sender:
                        out.append(self.send(u, token, 1))
        return out, False

    def output(self):
        return {"dist": self.dist, "answer": self.answer}


def run_distance_k(
    g: Graph,
    overlay: DirectedOverlay,
    u: int,
    k: int,
    cfg: BandwidthConfig,
    seed: int = 0,
    diameter: int | None = None,
    record_envelopes: bool = False,
) -> tuple[int | None, RunTrace]:
    """Distributed Distance_k(u); returns the node at overlay distance
    exactly k, or None when the chain is shorter.

    Needs overlay out-degree <= 1 and strict mode; completes within
    (k+1) * (D+1) rounds regardless of bandwidth.
    """
    if overlay.max_out_degree() > 1:
        raise GraphError("Distance_k handles overlays with out-degree <= 1")
    if u not in g._adj:
        raise GraphError(f"unknown start node {u}")
    if k < 0:
        raise GraphError("k must be non-negative")
    if cfg.mode != "strict":
        raise GraphError("run_distance_k uses strict mode")
    if k == 0:
        trace = RunTrace(edge_universe=frozenset(g.edges))
        return u, trace

    if diameter is None:
        diameter = g.diameter()
    inputs = {
        v: {
            "succ": (overlay.out_neighbors(v) or (None,))[0],
            "k": k,
            "diameter": diameter,
            "is_source": v == u,
        }
        for v in g.nodes
    }
    outputs, trace = run(
        g,
        _DistanceKNode,
        inputs,
        cfg,
        seed=seed,
        max_rounds=(k + 2) * (diameter + 1) + 4,
        record_envelopes=record_envelopes,
    )
    answers = {o["answer"] for o in outputs.values()} - {None}
    return (answers.pop() if answers else None), trace


def bridge_bits(instance: ReductionInstance, trace: RunTrace) -> int:
    """Bits that crossed the hub edge: the two-party communication meter."""
    return measure_bits(trace, instance.bridge)


def solve_pointer_instance(pi: PointerInstance, k: int) -> int | None:
    """Centralized pointer-follow oracle on the reduction's overlay."""
    inst = build_reduction(pi)
    return follow_pointer_chain(inst.overlay, inst.start, k)


def insensitivity_sweep(
    p: int, k: int, x_list, seed: int = 0, cfg_word_bits: int | None = None
) -> list[dict]:
    """Run one reduction instance at several bandwidths.

    Returns a row per X with rounds_used and bridge bits; Algorithm 1's
    schedule never consults the bandwidth, so both columns come out flat.
    """
    if sorted(x_list) != list(x_list) or any(x < 1 for x in x_list):
        raise GraphError("x_list must be ascending positive integers")
    pi = random_pointer_instance(p, seed)
    inst = build_reduction(pi)
    w = cfg_word_bits or inst.graph.word_bits()
    rows = []
    for x in x_list:
        cfg = BandwidthConfig(capacity_bits=x * w, word_bits=w)
        answer, trace = run_distance_k(
            inst.graph, inst.overlay, inst.start, k, cfg, seed=seed, diameter=3
        )
        rows.append(
            {
                "p": p,
                "n": inst.graph.n,
                "k": k,
                "B": x * w,
                "X": x,
                "rounds_used": trace.rounds_used,
                "bridge_bits": bridge_bits(inst, trace),
                "answer": answer,
                "correct": answer == solve_pointer_instance(pi, k),
            }
        )
    return rows


def figure_example() -> tuple[Graph, DirectedOverlay]:
    """A small fixed (G, G') pair: the overlay chain 1 -> 4 -> 7 makes 7
    the valid result for Distance_2(1)."""
    nodes = range(1, 9)
    ring = [(i, i + 1) for i in range(1, 8)] + [(1, 8)]
    g = Graph(nodes, ring)
    arcs = [(1, 4), (4, 7), (7, 2), (2, 5), (5, 8), (8, 3), (3, 6), (6, 1)]
    return g, DirectedOverlay(g.nodes, arcs)
