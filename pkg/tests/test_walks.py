import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pll.electric import Network, NetworkError, escape_probability
from pll.generators import cycle, grid, path, random_plane_graph
from pll.startree import star_tree_transform
from pll.walks import (
    BLOCK,
    AvoidanceEstimator,
    avoidance_count,
    avoidance_curve_exact,
    avoidance_exact_small,
    avoidance_probability,
    exact_hitting,
    perturbation_bound_check,
    simulate_walk,
    wilson_interval,
)

from _nets import perturbation_instance, random_network


class TestSimulate:
    def test_single_edge_alternates(self):
        tr = simulate_walk(Network.from_graph(path(2)), 0, 4, seed=1)
        assert tr.tolist() == [0, 1, 0, 1]

    def test_deterministic(self):
        net = Network.from_graph(grid(6))
        a = simulate_walk(net, 7, 500, seed=9)
        b = simulate_walk(net, 7, 500, seed=9)
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, simulate_walk(net, 7, 500, seed=10))

    def test_moves_along_edges(self):
        g = random_plane_graph(30, 2)
        tr = simulate_walk(Network.from_graph(g), 0, 300, seed=3)
        assert all(g.has_edge(int(x), int(y)) for x, y in zip(tr, tr[1:]))

    def test_conductance_bias(self):
        # from vertex 0: conductance 2 to vertex 1, 1 to vertex 2
        net = Network(3, [(0, 1), (0, 2)], [0.5, 1.0])
        hits = 0
        trials = 100_000
        from pll.walks import _Sampler
        from pll.rng import stream

        s = _Sampler(net)
        x = s.step(np.zeros(trials, dtype=np.int64), stream(4, 0).random(trials))
        p = float(np.mean(x == 1))
        lo, hi = wilson_interval(int(np.sum(x == 1)), trials, alpha=1e-3)
        assert lo <= 2 / 3 <= hi
        assert abs(p - 2 / 3) < 0.01

    def test_isolated_start(self):
        with pytest.raises(NetworkError):
            simulate_walk(Network(3, [(0, 1)]), 2, 5, seed=0)

    def test_bad_T(self):
        with pytest.raises(ValueError):
            simulate_walk(Network.from_graph(path(2)), 0, 0, seed=0)


class TestAvoidance:
    def test_T1_is_one(self):
        est = avoidance_probability(random_plane_graph(20, 1), 1, 2000, seed=0)
        assert est.phi == 1.0

    def test_exact_small_cases(self):
        assert avoidance_exact_small(path(2), 3) == 0.0
        assert avoidance_exact_small(cycle(3), 2) == pytest.approx(0.5)
        assert avoidance_exact_small(cycle(3), 1) == 1.0

    def test_exact_monotone(self):
        for g in (cycle(12), grid(5), random_plane_graph(25, 3)):
            curve = avoidance_curve_exact(g, 200)
            assert np.all(np.diff(curve) <= 1e-15)
            assert curve[49] == pytest.approx(avoidance_exact_small(g, 50), abs=1e-14)

    def test_exact_caps(self):
        with pytest.raises(ValueError):
            avoidance_exact_small(path(1001), 5)
        with pytest.raises(ValueError):
            avoidance_exact_small(path(5), 10_001)

    def test_cycle_mc_vs_exact(self):
        exact = avoidance_exact_small(cycle(20), 50)
        est = avoidance_probability(cycle(20), 50, 40_000, seed=5)
        assert abs(est.phi - exact) <= 3 * math.sqrt(exact * (1 - exact) / est.trials)
        assert est.ci[0] <= exact <= est.ci[1]

    @pytest.mark.parametrize("mode", ["uniform", "stationary"])
    def test_mc_within_3se(self, mode):
        g = random_plane_graph(30, 8)
        exact = avoidance_exact_small(g, 20, mode)
        est = avoidance_probability(Network.from_graph(g), 20, 20_000, seed=2, start_mode=mode)
        assert abs(est.phi - exact) <= 3 * math.sqrt(exact * (1 - exact) / est.trials)

    def test_seed_reproducible_across_threads(self, monkeypatch):
        net = Network.from_graph(grid(10))
        trials = 2 * BLOCK + 17
        monkeypatch.setenv("PLL_THREADS", "1")
        a = avoidance_count(net, 30, trials, seed=3)
        monkeypatch.setenv("PLL_THREADS", "3")
        b = avoidance_count(net, 30, trials, seed=3)
        assert a == b

    def test_half_width_shrinks(self):
        g = grid(8)
        w1 = avoidance_probability(g, 20, 1000, 0).half_width
        w2 = avoidance_probability(g, 20, 16000, 0).half_width
        assert w2 < w1 / 3

    def test_json(self):
        d = avoidance_probability(grid(4), 5, 100, 0).to_json()
        assert set(d) == {"phi", "ci", "trials"}

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            avoidance_probability(grid(4), 5, 100, 0, start_mode="sideways")


class TestHitting:
    def test_path_middle(self):
        h = exact_hitting(Network.from_graph(path(3)), 1, {0, 2})
        assert np.allclose(h.probabilities, [0.5, 0.5]) and h.expected_time == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_escape(self, seed):
        net = random_network(12, seed)
        h = exact_hitting(net, 0, {0, 11})
        assert h.probabilities[h.targets.index(11)] == pytest.approx(escape_probability(net, 0, 11), abs=1e-9)
        assert h.probabilities.sum() == pytest.approx(1.0)

    def test_return_probability_trend(self):
        # walk from the centre, absorbed at the boundary: return probability grows with the box
        vals = []
        for n in (5, 9, 17, 33):
            g = grid(n)
            c = (n // 2) * n + n // 2
            bd = {i * n + j for i in range(n) for j in range(n) if i in (0, n - 1) or j in (0, n - 1)}
            h = exact_hitting(Network.from_graph(g), c, bd | {c})
            vals.append(h.probabilities[h.targets.index(c)])
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1

    def test_errors(self):
        with pytest.raises(ValueError):
            exact_hitting(Network.from_graph(path(3)), 0, set())
        from pll.electric import DisconnectedError

        with pytest.raises(DisconnectedError):
            exact_hitting(Network(4, [(0, 1), (2, 3)]), 0, {3})


class TestPerturbation:
    def test_empty_S(self):
        net = random_network(10, 1)
        chk = perturbation_bound_check(net, net, set(), 0, 9)
        assert chk.lhs == 0 and chk.rhs == 0 and chk.passed

    def test_identical(self):
        net = random_network(10, 2)
        assert perturbation_bound_check(net, net, {3, 4, 5}, 0, 9).lhs == 0

    def test_precondition(self):
        net = random_network(10, 3)
        r = net.resistance.copy()
        r[:] *= 2
        with pytest.raises(ValueError):
            perturbation_bound_check(net, net.with_resistance(r), {1}, 0, 9)
        with pytest.raises(ValueError):
            perturbation_bound_check(net, net, {0}, 0, 9)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_random_instances(self, seed):
        net, net2, S, a, z = perturbation_instance(seed)
        assert perturbation_bound_check(net, net2, S, a, z).passed

    def test_star_tree_marks(self):
        g = random_plane_graph(40, 4, 0.8)
        stg = star_tree_transform(g)
        s = 4
        vm = stg.vertex_marks()
        S = set(np.flatnonzero(vm >= s).tolist())
        outside = [v for v in range(stg.graph.n) if v not in S and vm[v] > 0]
        assert len(outside) >= 2 and S
        net = stg.network
        r2 = np.where(stg.mark > s, 1.0, net.resistance)
        chk = perturbation_bound_check(net, net.with_resistance(r2), S, outside[0], outside[-1])
        assert chk.passed


class TestEstimator:
    def test_fit_predict(self):
        est = AvoidanceEstimator(T=10, trials=2000, seed=1).fit(grid(5))
        assert est.predict() == est.phi_ == est.estimate_.phi
        assert 0 < est.phi_ < 1

    def test_accepts_network(self):
        est = AvoidanceEstimator(T=1, trials=100).fit(Network.from_graph(cycle(5)))
        assert est.phi_ == 1.0
