"""Round-synchronous execution of node programs under per-edge bandwidth caps.

Each round every live node reads the envelopes addressed to it in the
previous round, updates its state, and emits envelopes toward neighbors.
Sending capacity is capped at B bits per edge per direction per round;
receiving is unlimited. Two congestion modes:

  strict  an outbox exceeding B bits toward one neighbor aborts the run
          (schedules that claim zero congestion treat this as a bug);
  queue   excess envelopes wait in a per-direction FIFO and are delivered
          in later rounds, with the backlog recorded.

Runs are deterministic: identical (graph, program, inputs, cfg, seed)
produce bit-identical traces.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

from .graphs import Graph


class EngineError(Exception):
    """Base class for simulator failures."""


class ConfigError(EngineError):
    """Invalid bandwidth configuration."""


class TopologyError(EngineError):
    """Envelope addressed outside the communication graph, or a bad tree."""


class CongestionViolation(EngineError):
    """Strict-mode outbox exceeded the per-direction bit budget."""

    def __init__(self, round_index, edge, direction, bits, capacity):
        self.round_index = round_index
        self.edge = edge
        self.direction = direction
        self.bits = bits
        self.capacity = capacity
        super().__init__(
            f"round {round_index}: {direction[0]}->{direction[1]} carries "
            f"{bits} bits > capacity {capacity}"
        )


class SimulationTimeout(EngineError):
    """Some node failed to halt within max_rounds. Carries the partial trace."""

    def __init__(self, max_rounds, trace):
        self.trace = trace
        super().__init__(f"nodes still live after {max_rounds} rounds")


STRICT = "strict"
QUEUE = "queue"


@dataclass(frozen=True)
class BandwidthConfig:
    """Word size and per-edge per-direction capacity, in bits.

    word_bits=None derives w = ceil(log2(maxId+1)) from the graph at run
    time. words_per_round (the X parameter) is floor(B / w).
    """

    capacity_bits: int
    word_bits: int | None = None
    mode: str = STRICT

    def __post_init__(self):
        if self.mode not in (STRICT, QUEUE):
            raise ConfigError(f"mode must be 'strict' or 'queue', got {self.mode!r}")
        if self.capacity_bits < 1:
            raise ConfigError("capacity_bits must be positive")
        if self.word_bits is not None:
            if self.word_bits < 1:
                raise ConfigError("word_bits must be positive")
            if self.capacity_bits < self.word_bits:
                raise ConfigError("need capacity_bits >= word_bits (X >= 1)")

    def resolve(self, g: Graph) -> "ResolvedConfig":
        w = self.word_bits if self.word_bits is not None else g.word_bits()
        if self.capacity_bits < w:
            raise ConfigError(
                f"capacity {self.capacity_bits} bits below word size {w}"
            )
        return ResolvedConfig(
            word_bits=w,
            capacity_bits=self.capacity_bits,
            words_per_round=self.capacity_bits // w,
            mode=self.mode,
        )


@dataclass(frozen=True)
class ResolvedConfig:
    word_bits: int
    capacity_bits: int
    words_per_round: int
    mode: str


class Envelope:
    """A point-to-point message with an explicit bit size.

    The payload is opaque to the engine; size_bits is the accounting unit
    and must cover the payload's encoding (algorithms here emit whole
    words: size_bits = words * w).
    """

    __slots__ = ("src", "dst", "payload", "size_bits")

    def __init__(self, src: int, dst: int, payload: Any, size_bits: int):
        self.src = src
        self.dst = dst
        self.payload = payload
        self.size_bits = size_bits

    def __repr__(self):
        return f"Envelope({self.src}->{self.dst}, {self.size_bits}b, {self.payload!r})"


@dataclass(frozen=True)
class NodeContext:
    """Everything a node legitimately knows at start."""

    node: int
    neighbors: tuple[int, ...]
    n: int
    word_bits: int
    capacity_bits: int
    words_per_round: int
    mode: str
    rng: random.Random
    local_input: Any = None


class NodeProgram:
    """Per-node behavior. The engine creates one instance per node.

    Subclasses implement __init__(ctx) (the init entry point), on_round,
    and output. State lives in instance attributes.
    """

    def __init__(self, ctx: NodeContext):
        self.ctx = ctx

    def send(self, dst: int, payload, words: int) -> Envelope:
        return Envelope(self.ctx.node, dst, payload, words * self.ctx.word_bits)

    def on_round(self, r: int, inbox: list[Envelope]) -> tuple[list[Envelope], bool]:
        raise NotImplementedError

    def output(self):
        return None


@dataclass
class RunTrace:
    """Per-round per-edge delivery records plus run-level counters.

    rows hold (round, u, v, direction, bits_delivered, backlog_bits) with
    u < v and direction 0 for u->v, 1 for v->u; only non-idle entries are
    recorded. rounds_used is the largest halt round over nodes, while
    rounds_executed counts simulated rounds (backlog may drain after the
    last halt).
    """

    rows: list[tuple[int, int, int, int, int, int]] = field(default_factory=list)
    halt_round: dict[int, int] = field(default_factory=dict)
    rounds_used: int = 0
    rounds_executed: int = 0
    total_messages: int = 0
    emitted_bits: dict[tuple[int, int], int] = field(default_factory=dict)
    delivered_bits: dict[tuple[int, int], int] = field(default_factory=dict)
    final_backlog_bits: dict[tuple[int, int], int] = field(default_factory=dict)
    envelope_log: list[tuple[int, int, int, int, Any]] | None = None
    edge_universe: frozenset[tuple[int, int]] = frozenset()

    @property
    def max_edge_bits(self) -> int:
        return max((r[4] for r in self.rows), default=0)

    @property
    def max_backlog_bits(self) -> int:
        per_round: dict[int, int] = {}
        for rnd, _u, _v, _d, _bits, backlog in self.rows:
            per_round[rnd] = per_round.get(rnd, 0) + backlog
        return max(per_round.values(), default=0)

    def total_bits(self, edge: tuple[int, int]) -> int:
        u, v = min(edge), max(edge)
        return sum(r[4] for r in self.rows if r[1] == u and r[2] == v)

    def overflow_words(self, word_bits: int) -> int:
        """Word-rounds of queueing delay: backlog summed over all records."""
        return sum(r[5] for r in self.rows) // word_bits

    def summary(self) -> dict:
        return {
            "rounds_used": self.rounds_used,
            "total_messages": self.total_messages,
            "max_edge_bits": self.max_edge_bits,
            "max_backlog_bits": self.max_backlog_bits,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write("round,u,v,direction,bits,backlog_bits\n")
            for row in self.rows:
                f.write(",".join(str(x) for x in row) + "\n")

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as f:
            json.dump(self.summary(), f, sort_keys=True)
            f.write("\n")

    def concat(self, other: "RunTrace") -> "RunTrace":
        """Append a later phase; its rounds are renumbered after this trace."""
        off = self.rounds_executed
        merged = RunTrace(
            rows=self.rows + [(r + off, u, v, d, b, q) for r, u, v, d, b, q in other.rows],
            halt_round={**self.halt_round, **{k: v + off for k, v in other.halt_round.items()}},
            rounds_used=off + other.rounds_used,
            rounds_executed=off + other.rounds_executed,
            total_messages=self.total_messages + other.total_messages,
            edge_universe=self.edge_universe | other.edge_universe,
        )
        for src in (self, other):
            for key, val in src.emitted_bits.items():
                merged.emitted_bits[key] = merged.emitted_bits.get(key, 0) + val
            for key, val in src.delivered_bits.items():
                merged.delivered_bits[key] = merged.delivered_bits.get(key, 0) + val
        merged.final_backlog_bits = dict(other.final_backlog_bits)
        if self.envelope_log is not None or other.envelope_log is not None:
            log = list(self.envelope_log or [])
            for rnd, src, dst, bits, payload in other.envelope_log or []:
                log.append((rnd + off, src, dst, bits, payload))
            merged.envelope_log = log
        return merged


def measure_bits(trace: RunTrace, edge: tuple[int, int]) -> int:
    """Total bits carried by one edge across all rounds, both directions."""
    u, v = min(edge), max(edge)
    if (u, v) not in trace.edge_universe:
        raise TopologyError(f"edge ({u},{v}) not in traced graph")
    return trace.total_bits((u, v))


def run(
    g: Graph,
    program: Callable[[NodeContext], NodeProgram],
    inputs: dict[int, Any] | None,
    cfg: BandwidthConfig,
    seed: int = 0,
    max_rounds: int = 100_000,
    record_envelopes: bool = False,
) -> tuple[dict[int, Any], RunTrace]:
    """Execute `program` on every node of g until all halt.

    Returns (per-node outputs, trace). Raises CongestionViolation in strict
    mode, TopologyError for envelopes to non-neighbors, SimulationTimeout
    when max_rounds elapses with live nodes.
    """
    if max_rounds <= 0:
        raise ConfigError("max_rounds must be positive")
    rc = cfg.resolve(g)
    inputs = inputs or {}

    nodes = {}
    for v in g.nodes:
        ctx = NodeContext(
            node=v,
            neighbors=g.neighbors(v),
            n=g.n,
            word_bits=rc.word_bits,
            capacity_bits=rc.capacity_bits,
            words_per_round=rc.words_per_round,
            mode=rc.mode,
            rng=random.Random(f"{seed}/{v}"),
            local_input=inputs.get(v),
        )
        nodes[v] = program(ctx)

    trace = RunTrace()
    trace.edge_universe = frozenset(g.edges)
    if record_envelopes:
        trace.envelope_log = []
    neighbor_sets = {v: frozenset(g.neighbors(v)) for v in g.nodes}

    channels: dict[tuple[int, int], deque[Envelope]] = {}
    inboxes: dict[int, list[Envelope]] = {}
    live = set(g.nodes)
    node_order = list(g.nodes)

    r = 0
    while True:
        if not live and not channels:
            break
        if r >= max_rounds:
            trace.rounds_executed = r
            trace.rounds_used = max(trace.halt_round.values(), default=0)
            trace.final_backlog_bits = {
                key: sum(e.size_bits for e in q) for key, q in channels.items() if q
            }
            raise SimulationTimeout(max_rounds, trace)

        # Compute + send.
        for v in node_order:
            if v not in live:
                continue
            outbox, halt = nodes[v].on_round(r, inboxes.get(v, ()))
            if outbox:
                per_dst_bits: dict[int, int] = {}
                for env in outbox:
                    if env.src != v:
                        raise TopologyError(f"node {v} forged sender {env.src}")
                    if env.dst not in neighbor_sets[v]:
                        raise TopologyError(
                            f"node {v} addressed non-neighbor {env.dst}"
                        )
                    if env.size_bits < 1:
                        raise ConfigError("envelope size_bits must be positive")
                    if env.size_bits > rc.capacity_bits:
                        edge = (min(v, env.dst), max(v, env.dst))
                        raise CongestionViolation(
                            r, edge, (v, env.dst), env.size_bits, rc.capacity_bits
                        )
                    per_dst_bits[env.dst] = per_dst_bits.get(env.dst, 0) + env.size_bits
                    channels.setdefault((v, env.dst), deque()).append(env)
                    key = (v, env.dst)
                    trace.emitted_bits[key] = (
                        trace.emitted_bits.get(key, 0) + env.size_bits
                    )
                    if trace.envelope_log is not None:
                        trace.envelope_log.append(
                            (r, v, env.dst, env.size_bits, env.payload)
                        )
                if rc.mode == STRICT:
                    for dst, bits in per_dst_bits.items():
                        if bits > rc.capacity_bits:
                            edge = (min(v, dst), max(v, dst))
                            raise CongestionViolation(
                                r, edge, (v, dst), bits, rc.capacity_bits
                            )
            if halt:
                trace.halt_round[v] = r
                live.discard(v)

        # Deliver: FIFO per direction, at most B bits per round.
        arrivals: dict[int, list[tuple[int, int, Envelope]]] = {}
        for key in sorted(channels):
            q = channels[key]
            sent_bits = 0
            seq = 0
            while q and sent_bits + q[0].size_bits <= rc.capacity_bits:
                env = q.popleft()
                sent_bits += env.size_bits
                trace.total_messages += 1
                trace.delivered_bits[key] = (
                    trace.delivered_bits.get(key, 0) + env.size_bits
                )
                if env.dst in live:
                    arrivals.setdefault(env.dst, []).append((env.src, seq, env))
                seq += 1
            backlog = sum(e.size_bits for e in q)
            if sent_bits or backlog:
                u, v = key
                edge = (u, v) if u < v else (v, u)
                direction = 0 if u < v else 1
                trace.rows.append((r, edge[0], edge[1], direction, sent_bits, backlog))
        for key in [k for k, q in channels.items() if not q]:
            del channels[key]

        inboxes = {}
        for dst, lst in arrivals.items():
            lst.sort(key=lambda t: (t[0], t[1]))
            inboxes[dst] = [env for _src, _seq, env in lst]
        r += 1

    trace.rounds_executed = r
    trace.rounds_used = max(trace.halt_round.values(), default=0)
    trace.final_backlog_bits = {}
    outputs = {v: nodes[v].output() for v in g.nodes}
    return outputs, trace
