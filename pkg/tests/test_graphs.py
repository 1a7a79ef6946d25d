import pytest

from congestbench.graphs import (
    DirectedOverlay,
    Graph,
    GraphError,
    generate,
    graph_from_text,
    graph_to_text,
    load_graph,
    load_overlay,
    save_graph,
    save_overlay,
)

KINDS = [
    ("path", {"n": 9}),
    ("star", {"n": 9}),
    ("grid", {"rows": 3, "cols": 4}),
    ("erdos-renyi", {"n": 24, "p": 0.2}),
    ("tree-plus-chords", {"n": 20, "chords": 5}),
]


def test_path_edges():
    g = generate("path", n=4)
    assert g.edges == ((0, 1), (1, 2), (2, 3))


def test_star_shape():
    g = generate("star", n=5)
    assert g.edges == ((0, 1), (0, 2), (0, 3), (0, 4))
    assert g.diameter() == 2


def test_grid_manhattan():
    g = generate("grid", rows=4, cols=4)
    assert g.n == 16
    assert g.diameter() == 6  # corner to opposite corner


def test_erdos_renyi_deterministic():
    a = generate("erdos-renyi", n=64, p=0.2, seed=7)
    b = generate("erdos-renyi", n=64, p=0.2, seed=7)
    assert a == b
    c = generate("erdos-renyi", n=64, p=0.2, seed=8)
    assert a != c


@pytest.mark.parametrize("kind,params", KINDS)
@pytest.mark.parametrize("seed", [0, 3])
def test_generators_connected_simple(kind, params, seed):
    g = generate(kind, seed=seed, **params)
    assert g.is_connected()
    assert all(u < v for u, v in g.edges)
    assert len(set(g.edges)) == g.m


@pytest.mark.parametrize("kind,params", KINDS)
def test_weighted_distinct_in_range(kind, params):
    g = generate(kind, seed=1, weighted=True, **params)
    ws = list(g.weights.values())
    assert len(set(ws)) == len(ws)
    assert all(1 <= w <= g.n**3 for w in ws)


def test_unconnectable_rejected():
    with pytest.raises(GraphError, match="retries"):
        generate("erdos-renyi", n=80, p=0.001, seed=0)


def test_bad_parameters():
    with pytest.raises(GraphError):
        generate("path", n=0)
    with pytest.raises(GraphError):
        generate("erdos-renyi", n=10, p=0.0)
    with pytest.raises(GraphError):
        generate("no-such-kind", n=4)


def test_graph_validation():
    with pytest.raises(GraphError, match="self-loop"):
        Graph([0, 1], [(0, 0)])
    with pytest.raises(GraphError, match="parallel"):
        Graph([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(GraphError, match="connected"):
        Graph([0, 1, 2], [(0, 1)])
    with pytest.raises(GraphError, match="cover every edge"):
        Graph([0, 1, 2], [(0, 1), (1, 2)], weights={(0, 1): 5})


def test_graph_text_roundtrip(tmp_path):
    g = generate("erdos-renyi", n=16, p=0.3, seed=2, weighted=True)
    path = tmp_path / "g.txt"
    save_graph(g, path)
    assert load_graph(path) == g
    text = path.read_text()
    assert text == graph_to_text(g)
    assert text.splitlines()[0] == f"{g.n} {g.m} weighted"


def test_graph_text_errors():
    with pytest.raises(GraphError, match="u < v"):
        graph_from_text("2 1\n1 0\n")
    with pytest.raises(GraphError, match="edge lines"):
        graph_from_text("3 2\n0 1\n")
    with pytest.raises(GraphError, match="header"):
        graph_from_text("3 2 heavy\n0 1\n1 2\n")


def test_overlay_roundtrip(tmp_path):
    nodes = range(1, 7)
    ov = DirectedOverlay(nodes, [(1, 4), (4, 2), (2, 1), (5, 6)])
    path = tmp_path / "ov.txt"
    save_overlay(ov, path)
    back = load_overlay(path, nodes)
    assert back.arcs == ov.arcs
    assert back.max_out_degree() == 1


def test_overlay_validation():
    with pytest.raises(GraphError):
        DirectedOverlay([1, 2], [(1, 3)])
