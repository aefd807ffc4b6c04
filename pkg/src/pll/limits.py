"""Local (Benjamini-Schramm) statistics of finite graphs: root sampling,
ball-code histograms, degree tails and root reweighting."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .canonical import canonical_code
from .graph import GraphError, PlanarGraph, RootedGraph, ball
from .rng import stream

MODES = ("uniform", "stationary")


def root_law(g: PlanarGraph, mode: str = "uniform") -> np.ndarray:
    if g.n == 0:
        raise GraphError("empty graph")
    if mode == "uniform":
        return np.full(g.n, 1.0 / g.n)
    if mode == "stationary":
        deg = g.degrees.astype(float)
        if np.any(deg == 0):
            raise GraphError("stationary root needs a graph without isolated vertices")
        return deg / deg.sum()
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def sample_roots(g: PlanarGraph, mode: str, size: int, seed: int) -> np.ndarray:
    p = root_law(g, mode)
    rng = stream(seed, 0)
    if mode == "uniform":
        return rng.integers(0, g.n, size=size)
    cw = np.cumsum(p)
    return np.minimum(np.searchsorted(cw, rng.random(size) * cw[-1], side="right"), g.n - 1)


def sample_root(g: PlanarGraph, mode: str = "uniform", seed: int = 0) -> int:
    return int(sample_roots(g, mode, 1, seed)[0])


@dataclass
class BallHistogram:
    probs: dict
    radius: int
    samples: int
    mode: str
    census: bool = False

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "samples": self.samples,
            "mode": self.mode,
            "census": self.census,
            "probs": {k: self.probs[k] for k in sorted(self.probs)},
        }


def ball_code(g: PlanarGraph, v: int, r: int) -> str:
    return canonical_code(ball(RootedGraph(g, int(v)), r)).hex()


def ball_histogram(g: PlanarGraph, r: int, samples: int | None = None, mode: str = "uniform", seed: int = 0,
                   census: bool = False) -> BallHistogram:
    """Law of the code of B(rho, r); exact over all vertices when ``census``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    law = root_law(g, mode)
    if census:
        acc = {}
        for v in range(g.n):
            c = ball_code(g, v, r)
            acc[c] = acc.get(c, 0.0) + law[v]
        total = sum(acc.values())
        return BallHistogram({k: p / total for k, p in acc.items()}, r, g.n, mode, True)
    if samples is None or samples < 1:
        raise ValueError("samples must be >= 1 unless census=True")
    roots = sample_roots(g, mode, samples, seed)
    cache = {}
    counts = Counter()
    for v in roots.tolist():
        if v not in cache:
            cache[v] = ball_code(g, v, r)
        counts[cache[v]] += 1
    return BallHistogram({k: c / samples for k, c in counts.items()}, r, samples, mode, False)


def tv_distance(h1: BallHistogram, h2: BallHistogram) -> float:
    if h1.radius != h2.radius:
        raise ValueError("histograms have different radii")
    keys = set(h1.probs) | set(h2.probs)
    return 0.5 * sum(abs(h1.probs.get(k, 0.0) - h2.probs.get(k, 0.0)) for k in keys)


@dataclass
class DegreeTail:
    k: np.ndarray
    exceed: np.ndarray
    counts: np.ndarray
    neighbor_max_exceed: np.ndarray
    power: float
    slope: float = math.nan
    intercept: float = math.nan
    r2: float = math.nan
    fit_k: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def rows(self):
        for k, p, c, q in zip(self.k, self.exceed, self.counts, self.neighbor_max_exceed):
            yield int(k), float(p), int(c), float(q)


def degree_tail(g: PlanarGraph, mode: str = "uniform", power: float = 1.0, k_min: int = 1,
                min_count: int = 10) -> DegreeTail:
    """Exact P(deg(rho) >= k) and P(D(rho) >= k), D = max neighbour degree.

    The tail fit regresses log P(deg >= k) on k**power over the distinct
    degree values k >= k_min with at least ``min_count`` vertices of degree >= k.
    """
    law = root_law(g, mode)
    deg = g.degrees
    dmax = int(deg.max()) if g.n else 0
    nmax = np.array([max((deg[u] for u in g.rot[v]), default=0) for v in range(g.n)])
    ks = np.arange(1, dmax + 1)
    exceed = np.array([law[deg >= k].sum() for k in ks])
    counts = np.array([int((deg >= k).sum()) for k in ks])
    nexc = np.array([law[nmax >= k].sum() for k in ks])
    tail = DegreeTail(ks, exceed, counts, nexc, power)
    values = np.unique(deg)
    sel = [k for k in values.tolist() if k >= k_min and (deg >= k).sum() >= min_count]
    if len(sel) >= 3:
        x = np.asarray(sel, dtype=float) ** power
        y = np.log(exceed[np.asarray(sel) - 1])
        fit = stats.linregress(x, y)
        tail.slope, tail.intercept, tail.r2 = float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)
        tail.fit_k = np.asarray(sel)
    return tail


def event_ratio_check(g: PlanarGraph, r: int = 1) -> tuple[float, int]:
    """Largest P_uniform(A) / P_stationary(A) over code events A; compare with max degree D.

    The maximum over all events is attained by a single code, so the census
    of singleton events is exhaustive.
    """
    hu = ball_histogram(g, r, mode="uniform", census=True)
    hs = ball_histogram(g, r, mode="stationary", census=True)
    worst = max(hu.probs[k] / hs.probs[k] for k in hu.probs)
    return float(worst), int(g.degrees.max())


def star_tree_root_law(st) -> np.ndarray:
    """Law of the root of G-dagger: stationary rho in G, then a uniform vertex of T_rho."""
    n = st.source_n
    deg = np.bincount(st.edge_tree, minlength=n).astype(float)
    # |T_v| edges = number of tree edges; |T_v| vertices = edges + 1
    src_deg = np.array([len(st.leaf_edges[v]) for v in range(n)], dtype=float)
    pi = src_deg / src_deg.sum()
    p = np.zeros(st.graph.n)
    for v in range(n):
        if src_deg[v] == 0:
            continue
        verts = st.tree_vertices(v)
        p[verts] += pi[v] / (deg[v] + 1)
    return p


def reweighting_ratios(st) -> tuple[float, float]:
    """min and max of P-dagger(x) / pi-dagger(x) over vertices of G-dagger."""
    p = star_tree_root_law(st)
    d = st.graph.degrees.astype(float)
    pi = d / d.sum()
    live = pi > 0
    r = p[live] / pi[live]
    return float(r.min()), float(r.max())
