"""Network random walks: simulation, avoidance probabilities and exact
hitting computations."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.base import BaseEstimator
from statsmodels.stats.proportion import proportion_confint

from .electric import DisconnectedError, Network, NetworkError, _as_set, escape_probability
from .graph import PlanarGraph
from .rng import stream

# trials are simulated in blocks; block b always uses stream (seed, b), so
# results do not depend on how blocks are spread over workers
BLOCK = 1 << 14

EXACT_MAX_N = 1000
EXACT_MAX_T = 10_000


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PLL_THREADS", "1")))
    except ValueError:
        return 1


class _Sampler:
    """Conductance-proportional neighbour sampling by inverse CDF on CSR rows."""

    def __init__(self, net: Network):
        live = net.conductance > 0
        u, v = net.edges[live, 0], net.edges[live, 1]
        c = net.conductance[live]
        a = sp.csr_matrix((np.concatenate([c, c]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                          shape=(net.n, net.n))
        a.sum_duplicates()
        a.sort_indices()
        self.indptr = a.indptr
        self.indices = a.indices
        self.cum = np.cumsum(a.data)
        self.base = np.concatenate([[0.0], self.cum])[a.indptr[:-1]]
        self.wdeg = np.asarray(a.sum(axis=1)).ravel()
        self.n = net.n

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        target = self.base[x] + u * self.wdeg[x]
        k = np.searchsorted(self.cum, target, side="right")
        k = np.clip(k, self.indptr[x], self.indptr[x + 1] - 1)
        return self.indices[k]


def simulate_walk(net: Network, start: int, T: int, seed: int) -> np.ndarray:
    """Positions X_0, ..., X_{T-1} of the network walk started at ``start``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0 <= start < net.n:
        raise ValueError("start is not a vertex")
    s = _Sampler(net)
    if s.wdeg[start] <= 0:
        raise NetworkError(f"start vertex {start} is isolated")
    rng = stream(seed, 0)
    u = rng.random(T - 1)
    out = np.empty(T, dtype=np.int64)
    out[0] = start
    x = np.array([start])
    for t in range(1, T):
        x = s.step(x, u[t - 1 : t])
        out[t] = x[0]
    return out


@dataclass
class AvoidanceEstimate:
    phi: float
    half_width: float
    ci: tuple
    trials: int
    successes: int

    @property
    def std_error(self) -> float:
        return math.sqrt(max(self.phi * (1 - self.phi), 0.0) / self.trials)

    def to_json(self) -> dict:
        return {"phi": self.phi, "ci": list(self.ci), "trials": self.trials}


def wilson_interval(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def _sample_starts(rng, sampler, mode, size, start=None):
    if mode == "uniform":
        return rng.integers(0, sampler.n, size=size)
    if mode == "stationary":
        cw = np.cumsum(sampler.wdeg)
        return np.minimum(np.searchsorted(cw, rng.random(size) * cw[-1], side="right"), sampler.n - 1)
    if mode == "fixed":
        return np.full(size, int(start), dtype=np.int64)
    raise ValueError(f"unknown start mode {mode!r}")


def _avoid_block(sampler, T, size, seed, block, mode, start):
    rng = stream(seed, block)
    x0 = _sample_starts(rng, sampler, mode, size, start)
    x = x0.copy()
    alive = np.arange(size)
    for _ in range(T):
        if len(alive) == 0:
            break
        x = sampler.step(x, rng.random(len(alive)))
        keep = x != x0[alive]
        alive, x = alive[keep], x[keep]
    return len(alive)


def avoidance_count(net: Network, T: int, trials: int, seed: int, start_mode: str = "uniform", start=None) -> int:
    """Number of walks (out of ``trials``) with X_t != X_0 for t = 1..T."""
    if T < 1 or trials < 1:
        raise ValueError("need T >= 1 and trials >= 1")
    sampler = _Sampler(net)
    if np.any(sampler.wdeg <= 0):
        raise NetworkError("graph has isolated vertices")
    sizes = [min(BLOCK, trials - b * BLOCK) for b in range((trials + BLOCK - 1) // BLOCK)]
    jobs = [(sampler, T, s, seed, b, start_mode, start) for b, s in enumerate(sizes)]
    nthreads = _threads()
    if nthreads == 1 or len(jobs) == 1:
        return sum(_avoid_block(*j) for j in jobs)
    with ThreadPoolExecutor(nthreads) as pool:
        return sum(pool.map(lambda j: _avoid_block(*j), jobs))


def avoidance_probability(g, T: int, trials: int, seed: int, start_mode: str = "uniform") -> AvoidanceEstimate:
    """Monte Carlo estimate of phi(T, G) with a 95% Wilson interval.

    ``g`` is a PlanarGraph (simple random walk) or a Network.
    """
    net = g if isinstance(g, Network) else Network.from_graph(g)
    k = avoidance_count(net, T, trials, seed, start_mode)
    lo, hi = wilson_interval(k, trials)
    return AvoidanceEstimate(k / trials, (hi - lo) / 2, (lo, hi), trials, k)


def avoidance_exact_small(g, T: int, start_mode: str = "uniform") -> float:
    """Exact phi(T, G): evolve all starts at once, killing mass that returns to its start."""
    net = g if isinstance(g, Network) else Network.from_graph(g)
    n = net.n
    if n > EXACT_MAX_N or T > EXACT_MAX_T:
        raise ValueError(f"exact mode is capped at n <= {EXACT_MAX_N}, T <= {EXACT_MAX_T}")
    if T < 1:
        raise ValueError("T must be >= 1")
    p = net.transition_matrix().tocsr()
    wdeg = net.weighted_degree()
    if np.any(wdeg <= 0):
        raise NetworkError("graph has isolated vertices")
    # row x: sub-probability law of the walk from x that has not yet returned
    u = np.eye(n)
    diag = np.arange(n)
    pt = p.T.tocsr()
    for _ in range(T):
        u = (pt @ u.T).T
        u[diag, diag] = 0.0
    surv = u.sum(axis=1)
    if start_mode == "uniform":
        return float(surv.mean())
    if start_mode == "stationary":
        return float(surv @ wdeg / wdeg.sum())
    raise ValueError(f"unknown start mode {start_mode!r}")


def avoidance_curve_exact(g, T: int) -> np.ndarray:
    """phi(t, G) for t = 1..T from one pass of the killed evolution."""
    net = g if isinstance(g, Network) else Network.from_graph(g)
    n = net.n
    if n > EXACT_MAX_N or T > EXACT_MAX_T:
        raise ValueError(f"exact mode is capped at n <= {EXACT_MAX_N}, T <= {EXACT_MAX_T}")
    pt = net.transition_matrix().T.tocsr()
    u = np.eye(n)
    diag = np.arange(n)
    out = np.empty(T)
    for t in range(T):
        u = (pt @ u.T).T
        u[diag, diag] = 0.0
        out[t] = u.sum(axis=1).mean()
    return out


@dataclass
class HittingResult:
    targets: list
    probabilities: np.ndarray
    expected_time: float


def exact_hitting(net: Network, a: int, targets) -> HittingResult:
    """Law of X_tau and E tau for tau = min{n >= 1 : X_n in targets}, walk from a."""
    tset = _as_set(targets)
    if not tset:
        raise ValueError("targets must be nonempty")
    labels = net.components()
    if labels[a] not in set(labels[list(tset)].tolist()):
        raise DisconnectedError("no target is reachable from a")
    p = net.transition_matrix().tocsr()
    tl = sorted(tset)
    comp = np.flatnonzero(labels == labels[a])
    rest = np.array([v for v in comp if v not in tset], dtype=np.int64)
    # h[y, j]: probability that the walk from y (time 0 counts) first meets targets at tl[j]
    h = np.zeros((net.n, len(tl)))
    e = np.zeros(net.n)
    for j, t in enumerate(tl):
        h[t, j] = 1.0
    if len(rest):
        q = (sp.identity(len(rest)) - p[rest][:, rest]).tocsc()
        lu = spla.splu(q)
        b = np.asarray(p[rest][:, tl].todense())
        h[rest] = lu.solve(b)
        e[rest] = lu.solve(np.ones(len(rest)))
    row = p[a]
    probs = np.asarray(row @ h).ravel()
    etime = 1.0 + float((row @ e)[0])
    return HittingResult(tl, probs, etime)


@dataclass
class PerturbationCheck:
    lhs: float
    rhs: float
    passed: bool


def perturbation_bound_check(net: Network, net2: Network, S, a: int, z: int, tol: float = 1e-12) -> PerturbationCheck:
    """|P_a(tau_z < tau_a) - P'_a(tau_z < tau_a)| <= P_a(tau_S < tau_{a,z}).

    The two networks must share their edge list and differ only on edges
    with both endpoints in S.
    """
    S = _as_set(S)
    if a in S or z in S:
        raise ValueError("a and z must lie outside S")
    if net.n != net2.n or not np.array_equal(net.edges, net2.edges):
        raise ValueError("networks must share vertices and edges")
    inside = np.isin(net.edges[:, 0], list(S)) & np.isin(net.edges[:, 1], list(S))
    if np.any((net.resistance != net2.resistance) & ~inside):
        raise ValueError("resistances differ on an edge not inside S x S")
    lhs = abs(escape_probability(net, a, z) - escape_probability(net2, a, z))
    if S:
        hit = exact_hitting(net, a, S | {a, z})
        rhs = float(sum(pr for t, pr in zip(hit.targets, hit.probabilities) if t in S))
    else:
        rhs = 0.0
    return PerturbationCheck(lhs, rhs, lhs <= rhs + tol)


class AvoidanceEstimator(BaseEstimator):
    """``fit(g)`` estimates phi(T, g) by Monte Carlo; results in ``estimate_``."""

    def __init__(self, T=100, trials=10_000, seed=0, start_mode="uniform"):
        self.T = T
        self.trials = trials
        self.seed = seed
        self.start_mode = start_mode

    def fit(self, X, y=None):
        from ._validation import check_graph

        if not isinstance(X, Network):
            X = check_graph(X)
        self.estimate_ = avoidance_probability(X, self.T, self.trials, self.seed, self.start_mode)
        self.phi_ = self.estimate_.phi
        return self

    def predict(self, X=None):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "estimate_")
        return self.phi_
