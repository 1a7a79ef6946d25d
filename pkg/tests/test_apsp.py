import pytest

from congestbench.apsp import (
    compute_dfs_times,
    predicted_rounds_apsp,
    run_apsp,
    schedule_from_times,
)
from congestbench.engine import BandwidthConfig
from congestbench.graphs import Graph, GraphError, generate
from congestbench.oracles import apsp_oracle


def cfg_for(g, x):
    w = g.word_bits()
    return BandwidthConfig(capacity_bits=x * w, word_bits=w)


def euler_first_visits(children, root):
    """Brute-force Euler-tour first-visit times; the independent oracle."""
    times = {}
    clock = 0

    def walk(v):
        nonlocal clock
        times[v] = clock
        for c in children.get(v, ()):
            clock += 1
            walk(c)
            clock += 1

    walk(root)
    return times


def test_dfs_times_spec_tree():
    # root 0, children 1 (which has child 2) then 3
    g = Graph([0, 1, 2, 3], [(0, 1), (1, 2), (0, 3)])
    sched, _ = compute_dfs_times(g, 0, cfg_for(g, 1))
    assert sched.visit_time == {0: 0, 1: 1, 2: 2, 3: 5}
    assert sched.visit_time == euler_first_visits({0: [1, 3], 1: [2]}, 0)


def test_dfs_times_path():
    g = generate("path", n=4)
    sched, _ = compute_dfs_times(g, 0, cfg_for(g, 1))
    assert sched.visit_time == {0: 0, 1: 1, 2: 2, 3: 3}


def test_dfs_times_single_child_star():
    g = generate("star", n=5)
    sched, trace = compute_dfs_times(g, 0, cfg_for(g, 1))
    assert sched.visit_time == euler_first_visits({0: [1, 2, 3, 4]}, 0)
    assert trace.rounds_used <= 6 * g.diameter() + 10


def test_dfs_times_match_euler_on_random_tree():
    g = generate("tree-plus-chords", n=24, chords=0, seed=8)
    sched, _ = compute_dfs_times(g, 0, cfg_for(g, 2))
    from congestbench.primitives import build_bfs_tree

    tree, _ = build_bfs_tree(g, 0, cfg_for(g, 2))
    children = {v: list(t.children) for v, t in tree.items()}
    assert sched.visit_time == euler_first_visits(children, 0)


def test_schedule_blocks():
    times = {v: v for v in range(8)}  # 2n = 16
    sched = schedule_from_times(times, 4)  # L = 4
    assert sched.block_length == 4
    assert sched.block_index(0) == 1 and sched.block_index(3) == 1
    assert sched.block_index(4) == 2 and sched.block_index(7) == 2
    assert all(0 <= sched.start_round(v) < 2 * sched.block_length for v in times)
    # within one block, starts are spaced by twice the t gaps
    assert sched.start_round(1) - sched.start_round(0) == 2
    assert sched.start_round(6) - sched.start_round(5) == 2
    assert sched.block_count() <= 4


def test_apsp_path_matches_oracle():
    g = generate("path", n=4)
    table, _ = run_apsp(g, cfg_for(g, 1))
    assert table == apsp_oracle(g)


def test_apsp_star_output_invariant_under_x():
    g = generate("star", n=9)
    tables, rounds = {}, {}
    for x in (1, 2, 4):
        tables[x], trace = run_apsp(g, cfg_for(g, x))
        rounds[x] = trace.rounds_used
    assert tables[1] == tables[2] == tables[4] == apsp_oracle(g)
    assert rounds[1] > rounds[2] > rounds[4]


def test_apsp_congestion_within_x():
    g = generate("erdos-renyi", n=64, p=0.15, seed=11)
    x = 4
    table, trace = run_apsp(g, cfg_for(g, x), record_envelopes=True)
    assert table == apsp_oracle(g)
    # distinct flood origins per (edge, direction, round), from the envelope log
    per_slot = {}
    for rnd, src, dst, bits, payload in trace.envelope_log:
        if isinstance(payload, int):  # flood tokens carry the bare origin id
            per_slot.setdefault((rnd, src, dst), set()).add(payload)
    assert per_slot, "expected flood tokens in the envelope log"
    assert max(len(origins) for origins in per_slot.values()) <= x


def test_apsp_requires_strict_unweighted():
    g = generate("path", n=4, weighted=True, seed=1)
    with pytest.raises(GraphError):
        run_apsp(g, cfg_for(g, 1))
    g2 = generate("path", n=4)
    w = g2.word_bits()
    with pytest.raises(GraphError):
        run_apsp(g2, BandwidthConfig(capacity_bits=w, word_bits=w, mode="queue"))


def test_predicted_rounds_shape():
    assert predicted_rounds_apsp(64, 3, 2) < predicted_rounds_apsp(64, 3, 1)
    # X >= 2n collapses the block term to a single block
    big = predicted_rounds_apsp(64, 3, 128)
    assert big == predicted_rounds_apsp(64, 3, 4096)
    # doubling X roughly halves the block contribution
    d = 2
    lo = predicted_rounds_apsp(512, d, 1)
    hi = predicted_rounds_apsp(512, d, 2)
    assert (lo - hi) == pytest.approx(4 * 1024 / 2, rel=0.01)


def test_predicted_rounds_ratio_example():
    # n=512, D=2: the block-driven part shrinks ~16x from X=1 to X=16
    c0_term = 6 * 2
    lo = predicted_rounds_apsp(512, 2, 1) - c0_term
    hi = predicted_rounds_apsp(512, 2, 16) - c0_term
    assert 14 <= lo / hi <= 16.5


def test_predicted_rounds_validation():
    with pytest.raises(ValueError):
        predicted_rounds_apsp(0, 2, 1)
    with pytest.raises(ValueError):
        predicted_rounds_apsp(8, 2, 0)
