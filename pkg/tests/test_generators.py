import math

import numpy as np
import pytest
from scipy import stats

from pll.electric import effective_resistance
from pll.generators import (
    binary_tree,
    bipyramid,
    bundle_size,
    cycle,
    flip_edge,
    flip_mcmc_triangulation,
    grid,
    path,
    random_plane_graph,
    sharpness_bound,
    sharpness_graph,
    sharpness_spine,
    triangular_boundary,
    triangular_disk,
)
from pll.graph import GraphError
from pll.rng import stream
from pll.triangulate import is_triangulation


def test_grid2_is_c4():
    g = grid(2)
    assert g.n == 4 and g.num_edges == 4 and set(g.degrees.tolist()) == {2}


def test_binary_tree_size():
    assert binary_tree(3).n == 15 and binary_tree(3).num_edges == 14


def test_cycle_and_path():
    assert cycle(5).is_plane() and path(5).num_edges == 4


@pytest.mark.parametrize("r", [1, 2, 5])
def test_triangular_disk(r):
    g = triangular_disk(r)
    bd = set(triangular_boundary(r))
    assert all(g.degree(v) == 6 for v in range(g.n) if v not in bd)
    assert g.is_plane()
    faces = g.faces()
    assert sum(len(f) != 3 for f in faces) == 1


@pytest.mark.parametrize("fn,arg", [(grid, 1), (cycle, 2), (binary_tree, 0), (triangular_disk, 0), (bipyramid, 3)])
def test_parameter_ranges(fn, arg):
    with pytest.raises(GraphError):
        fn(arg)


class TestSharpness:
    def test_bundle_sizes(self):
        assert bundle_size(2, 0.5) == 4
        assert bundle_size(3, 0.5) == 9
        assert bundle_size(2, 1 / 3) == 8

    def test_structure(self):
        sg = sharpness_graph(3, 0.5)
        # 15 tree vertices; height-k edges carry ceil(k^2) midpoints
        mids = 8 * 1 + 4 * 4 + 2 * 9
        assert sg.network.n == 15 + mids
        assert sg.apex == 0 and len(sg.leaves) == 8
        assert sg.network.graph.is_plane()

    def test_partial_sums_term_by_term(self):
        prev = 0.0
        for h in range(1, 9):
            sg = sharpness_graph(h, 0.5)
            r = effective_resistance(sg.network, {sg.leaves[0]}, {sg.apex})
            assert r - prev == pytest.approx(2.0 / bundle_size(h, 0.5), abs=1e-9)
            assert r <= sharpness_bound(h, 0.5) + 1e-9
            net, a, b = sharpness_spine(h, 0.5)
            assert effective_resistance(net, {a}, {b}) == pytest.approx(r, abs=1e-12)
            prev = r

    def test_limit_bound(self):
        assert sharpness_bound(30, 0.5) < math.pi ** 2 / 3

    def test_alpha_range(self):
        with pytest.raises(GraphError):
            sharpness_graph(3, 1.0)


class TestFlip:
    def test_zero_steps(self):
        assert flip_mcmc_triangulation(12, 0, 5) == bipyramid(12)

    @pytest.mark.parametrize("n", [4, 5, 9, 40])
    def test_seed_is_triangulation(self, n):
        assert is_triangulation(bipyramid(n))

    @pytest.mark.parametrize("seed", range(5))
    def test_outputs_are_triangulations(self, seed):
        g = flip_mcmc_triangulation(60, 3000, seed)
        assert is_triangulation(g) and g.num_edges == 3 * 60 - 6

    def test_flips_preserve_structure(self):
        from pll.graph import PlanarGraph

        rot = [list(r) for r in bipyramid(30).rot]
        rng = stream(0, 3)
        for step in range(400):
            u = int(rng.integers(0, 30))
            v = rot[u][int(rng.integers(0, len(rot[u])))]
            flip_edge(rot, u, v)
            if step % 40 == 0:
                g = PlanarGraph(rot)
                assert g.n == 30 and is_triangulation(g)

    def test_degree_cap(self):
        g = flip_mcmc_triangulation(100, 5000, 1, max_degree=10)
        # the poles of the seed start at degree n-2 and can only shrink
        others = np.delete(g.degrees, [98, 99])
        assert others.max() <= 10

    def test_deterministic(self):
        assert flip_mcmc_triangulation(40, 2000, 3) == flip_mcmc_triangulation(40, 2000, 3)

    def test_two_chains_agree(self):
        def hist(seed):
            d = flip_mcmc_triangulation(50, 10**6, seed).degrees
            return [int(np.sum(d == k)) for k in (3, 4, 5, 6, 7)] + [int(np.sum(d >= 8))]

        table = np.array([hist(1), hist(2)])
        table = table[:, table.sum(axis=0) > 0]
        assert stats.chi2_contingency(table).pvalue > 1e-3


def test_random_plane_graph():
    g = random_plane_graph(100, 4, 0.3)
    assert g.is_connected() and g.is_plane()
    assert random_plane_graph(100, 4, 0.0).num_edges == 99
