import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pll.generators import binary_tree, cycle, grid, path, random_plane_graph, triangular_disk
from pll.graph import GraphError, PlanarGraph
from pll.triangulate import _zigzag_pairs, is_triangulation, triangulate_zigzag


def contains(big, small):
    return all(big.has_edge(u, v) for u, v in small.edges())


def test_triangle_unchanged():
    rep = triangulate_zigzag(cycle(3))
    assert rep.graph == cycle(3) and rep.added_edges == 0


def test_square_one_diagonal():
    rep = triangulate_zigzag(cycle(4))
    assert rep.added_edges == 2 and rep.added_vertices == 0
    # one diagonal inside each of the two faces
    assert rep.graph.has_edge(0, 2) or rep.graph.has_edge(1, 3)
    assert is_triangulation(rep.graph)


def test_zigzag_pattern():
    pairs = _zigzag_pairs(7)
    assert len(pairs) == 4
    assert pairs[0] == (1, 6)


@pytest.mark.parametrize("g", [path(2), path(5), grid(4), binary_tree(3), cycle(9), triangular_disk(2)],
                         ids=["K2", "P5", "grid4", "tree3", "C9", "tri2"])
def test_families(g):
    rep = triangulate_zigzag(g)
    assert is_triangulation(rep.graph)
    assert contains(rep.graph, g)


def test_rejects_nonplanar():
    rot = [[3, 4, 5]] * 3 + [[0, 1, 2]] * 3
    with pytest.raises(GraphError):
        triangulate_zigzag(PlanarGraph(rot))


def test_rejects_disconnected():
    with pytest.raises(GraphError):
        triangulate_zigzag(PlanarGraph([[1], [0], [3], [2]]))


def test_validator_negative():
    assert not is_triangulation(grid(3))
    assert not is_triangulation(path(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 120), st.integers(0, 10**6), st.floats(0.0, 1.0))
def test_random_plane_graphs(n, seed, extra):
    g = random_plane_graph(n, seed, extra)
    rep = triangulate_zigzag(g)
    assert is_triangulation(rep.graph)
    assert contains(rep.graph, g)
    assert rep.degree_factor <= 3.0


def test_large_instance():
    g = random_plane_graph(500, 11, 0.2)
    rep = triangulate_zigzag(g)
    assert is_triangulation(rep.graph) and rep.degree_factor <= 3.0
