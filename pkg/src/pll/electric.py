"""Electrical networks: effective resistance, current flows, Dirichlet energy
and the random-walk identities that tie them together."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import PlanarGraph

INF = math.inf

# above this many unknowns the direct factorisation is replaced by CG
DIRECT_SOLVE_LIMIT = 400_000
CG_RTOL = 1e-12


class NetworkError(ValueError):
    pass


class DisconnectedError(NetworkError):
    pass


class Network:
    """Multigraph with positive, possibly infinite, edge resistances.

    Infinite resistances are stored as zero conductance and never enter a
    linear solve as floating-point infinity.
    """

    def __init__(self, n: int, edges, resistance=None, graph: PlanarGraph | None = None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if resistance is None:
            resistance = np.ones(len(edges))
        resistance = np.array([INF if r == "inf" else float(r) for r in np.ravel(resistance)], dtype=float)
        if len(resistance) != len(edges):
            raise NetworkError("one resistance per edge is required")
        if np.any(~(resistance > 0)):
            raise NetworkError("resistances must be positive")
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise NetworkError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise NetworkError("self-loops are not allowed")
        self.n = int(n)
        self.edges = edges
        self.resistance = resistance
        self.graph = graph
        with np.errstate(divide="ignore"):
            self.conductance = np.where(np.isinf(resistance), 0.0, 1.0 / resistance)

    @classmethod
    def from_graph(cls, g: PlanarGraph, resistance=None) -> "Network":
        return cls(g.n, g.edge_array(), resistance, graph=g)

    @property
    def m(self) -> int:
        return len(self.edges)

    def with_resistance(self, resistance) -> "Network":
        return Network(self.n, self.edges, resistance, graph=self.graph)

    def laplacian(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        c = self.conductance
        rows = np.concatenate([u, v, u, v])
        cols = np.concatenate([v, u, u, v])
        vals = np.concatenate([-c, -c, c, c])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def weighted_degree(self) -> np.ndarray:
        out = np.zeros(self.n)
        np.add.at(out, self.edges[:, 0], self.conductance)
        np.add.at(out, self.edges[:, 1], self.conductance)
        return out

    def transition_matrix(self) -> sp.csr_matrix:
        """Network random walk: p(x, y) proportional to c(x, y)."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        c = self.conductance
        a = sp.csr_matrix((np.concatenate([c, c]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                          shape=(self.n, self.n))
        deg = np.asarray(a.sum(axis=1)).ravel()
        with np.errstate(divide="ignore"):
            inv = np.where(deg > 0, 1.0 / deg, 0.0)
        return sp.diags(inv) @ a

    def components(self) -> np.ndarray:
        live = self.conductance > 0
        e = self.edges[live]
        adj = sp.csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(self.n, self.n))
        _, labels = sp.csgraph.connected_components(adj, directed=False)
        return labels

    def to_json(self) -> dict:
        d = self.graph.to_json() if self.graph is not None else {"n": self.n, "edges": self.edges.tolist()}
        d["R"] = ["inf" if math.isinf(r) else float(r) for r in self.resistance]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Network":
        if "rot" in d:
            g = PlanarGraph.from_json(d)
            return cls.from_graph(g, d.get("R"))
        return cls(d["n"], d["edges"], d.get("R"))


@dataclass
class Flow:
    """Edge function on a network, stored per edge in the ``edges[i, 0] -> edges[i, 1]`` direction.

    Antisymmetry is implicit: the value on the reversed edge is the negative.
    """

    net: Network
    values: np.ndarray
    sources: frozenset
    sinks: frozenset

    def divergence(self) -> np.ndarray:
        """Net outflow at every vertex."""
        div = np.zeros(self.net.n)
        np.add.at(div, self.net.edges[:, 0], self.values)
        np.subtract.at(div, self.net.edges[:, 1], self.values)
        return div

    @property
    def strength(self) -> float:
        return float(self.divergence()[list(self.sources)].sum())

    def energy(self) -> float:
        r = self.net.resistance
        v = self.values
        finite = np.isfinite(r)
        if np.any(v[~finite] != 0):
            return INF
        return float(np.sum(r[finite] * v[finite] ** 2))

    def value(self, x: int, y: int) -> float:
        """Total flow from ``x`` to ``y`` over all parallel edges."""
        e = self.net.edges
        fwd = (e[:, 0] == x) & (e[:, 1] == y)
        bwd = (e[:, 0] == y) & (e[:, 1] == x)
        return float(self.values[fwd].sum() - self.values[bwd].sum())

    def is_flow(self, tol: float = 1e-9) -> bool:
        div = self.divergence()
        mask = np.ones(self.net.n, dtype=bool)
        mask[list(self.sources | self.sinks)] = False
        return bool(np.all(np.abs(div[mask]) <= tol))


def _as_set(x) -> frozenset:
    if isinstance(x, (int, np.integer)):
        return frozenset([int(x)])
    return frozenset(int(v) for v in x)


def _solve_spd(a: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    if a.shape[0] == 0:
        return np.zeros((0,) + b.shape[1:])
    a = a.tocsc()
    if a.shape[0] <= DIRECT_SOLVE_LIMIT:
        return spla.splu(a).solve(b)
    x, info = spla.cg(a, b, rtol=CG_RTOL, maxiter=20 * a.shape[0])
    if info != 0:
        raise NetworkError(f"conjugate gradient did not converge (info={info})")
    return x


def harmonic_potential(net: Network, A, Z) -> np.ndarray | None:
    """Potential equal to 0 on A, 1 on Z and harmonic elsewhere.

    Vertices in components meeting only A (only Z) get 0 (1); components
    meeting neither get NaN. Returns None when no component meets both.
    """
    A, Z = _as_set(A), _as_set(Z)
    if A & Z:
        raise NetworkError("A and Z must be disjoint")
    labels = net.components()
    compA = set(labels[list(A)].tolist()) if A else set()
    compZ = set(labels[list(Z)].tolist()) if Z else set()
    both = compA & compZ
    g = np.full(net.n, np.nan)
    in_a = np.isin(labels, list(compA - both))
    in_z = np.isin(labels, list(compZ - both))
    g[in_a] = 0.0
    g[in_z] = 1.0
    g[list(A)] = 0.0
    g[list(Z)] = 1.0
    if not both:
        return None
    active = np.isin(labels, list(both))
    boundary = np.zeros(net.n, dtype=bool)
    boundary[list(A | Z)] = True
    interior = np.flatnonzero(active & ~boundary)
    lap = net.laplacian().tocsr()
    if len(interior):
        zs = np.array(sorted(Z))
        l_ii = lap[interior][:, interior]
        rhs = -np.asarray(lap[interior][:, zs].sum(axis=1)).ravel()
        g[interior] = _solve_spd(l_ii, rhs)
    return g


def effective_resistance(net: Network, A, Z) -> float:
    """Reff(A <-> Z); +inf when A or Z is empty or they are not connected."""
    A, Z = _as_set(A), _as_set(Z)
    if A & Z:
        raise NetworkError("A and Z must be disjoint")
    if not A or not Z:
        return INF
    g = harmonic_potential(net, A, Z)
    if g is None:
        return INF
    energy = dirichlet_energy(net, g)
    if energy <= 0:
        return INF
    return 1.0 / energy


def dirichlet_energy(net: Network, g) -> float:
    """Sum over edges of c_e (g(x) - g(y))^2. NaN entries (unreached components) count as zero."""
    g = np.nan_to_num(np.asarray(g, dtype=float), nan=0.0)
    d = g[net.edges[:, 0]] - g[net.edges[:, 1]]
    return float(np.sum(net.conductance * d * d))


def unit_current_flow(net: Network, A, Z) -> Flow:
    A, Z = _as_set(A), _as_set(Z)
    g = harmonic_potential(net, A, Z)
    if g is None:
        raise DisconnectedError("A and Z are not connected")
    reff = 1.0 / dirichlet_energy(net, g)
    g = np.nan_to_num(g, nan=0.0)
    vals = net.conductance * (g[net.edges[:, 1]] - g[net.edges[:, 0]]) * reff
    return Flow(net, vals, A, Z)


def escape_probability(net: Network, a: int, z: int) -> float:
    """P_a(X_tau = z) with tau the first time n >= 1 the walk is in {a, z}.

    Solved on the transition matrix, independently of the Laplacian route.
    """
    if a == z:
        raise NetworkError("a and z must differ")
    labels = net.components()
    if labels[a] != labels[z]:
        raise DisconnectedError("a and z are not connected")
    p = net.transition_matrix().tocsr()
    comp = np.flatnonzero(labels == labels[a])
    rest = np.array([v for v in comp if v != a and v != z], dtype=np.int64)
    h = np.zeros(net.n)
    h[z] = 1.0
    if len(rest):
        q = p[rest][:, rest]
        b = np.asarray(p[rest][:, [z]].todense()).ravel()
        h[rest] = spla.spsolve((sp.identity(len(rest)) - q).tocsc(), b)
    return float(p[a].dot(h)[0])


def hitting_times(net: Network, target) -> np.ndarray:
    """Expected hitting time of ``target`` (time 0 on it) from every vertex."""
    target = _as_set(target)
    p = net.transition_matrix().tocsr()
    labels = net.components()
    tcomp = set(labels[list(target)].tolist())
    reach = np.isin(labels, list(tcomp))
    rest = np.array([v for v in range(net.n) if v not in target and reach[v]], dtype=np.int64)
    t = np.full(net.n, INF)
    t[list(target)] = 0.0
    if len(rest):
        q = p[rest][:, rest]
        t[rest] = spla.spsolve((sp.identity(len(rest)) - q).tocsc(), np.ones(len(rest)))
    return t


def commute_time(net: Network, a: int, z: int) -> tuple[float, float]:
    """(E_a tau_z, E_z tau_a) by exact linear solves."""
    if a == z:
        raise NetworkError("a and z must differ")
    labels = net.components()
    if labels[a] != labels[z]:
        raise DisconnectedError("a and z are not connected")
    return float(hitting_times(net, z)[a]), float(hitting_times(net, a)[z])


def restrict_to(net: Network, A) -> Network:
    """Resistances R^A: unchanged inside A, infinite on every other edge."""
    A = _as_set(A)
    inside = np.isin(net.edges[:, 0], list(A)) & np.isin(net.edges[:, 1], list(A))
    return net.with_resistance(np.where(inside, net.resistance, INF))


def splice_flow(net: Network, A, a: int, z: int) -> tuple[Flow, float]:
    """Unit flow a -> z glued from the current flow out of A and internal flows.

    Outside A the flow is the unit current flow A -> z; inside A it is the
    mixture sum_v alpha_v theta^{v,A} of unit current flows a -> v in the
    network restricted to A, weighted by the current alpha_v leaving A at v.
    Returns the flow and the bound Reff(A <-> z) + max_v Reff(a <-> v; R^A).
    """
    A = _as_set(A)
    if a not in A or z in A:
        raise NetworkError("need a in A and z outside A")
    theta_a = unit_current_flow(net, A, {z})
    reff_az = theta_a.energy()
    net_a = restrict_to(net, A)
    e = net.edges
    inside = np.isin(e[:, 0], list(A)) & np.isin(e[:, 1], list(A))
    # alpha_v: current leaving A through v
    alpha = {}
    div_out = np.zeros(net.n)
    cross = ~inside
    np.add.at(div_out, e[cross, 0], theta_a.values[cross])
    np.subtract.at(div_out, e[cross, 1], theta_a.values[cross])
    for v in A:
        alpha[v] = float(div_out[v])
    vals = np.where(inside, 0.0, theta_a.values)
    worst = 0.0
    for v in sorted(A - {a}):
        r = effective_resistance(net_a, {a}, {v})
        if math.isinf(r):
            raise NetworkError(f"infinite resistance inside A between {a} and {v}")
        worst = max(worst, r)
        if alpha[v] != 0.0:
            inner = unit_current_flow(net_a, {a}, {v})
            vals = vals + np.where(inside, alpha[v] * inner.values, 0.0)
    flow = Flow(net, vals, frozenset([a]), frozenset([z]))
    bound = reff_az + worst
    return flow, bound


def reff_matrix_tree_oracle(net: Network, a: int, z: int, max_n: int = 25) -> float:
    """Reff(a <-> z) as (weighted 2-forests separating a, z) / (weighted spanning trees).

    Both counts are determinants of reduced conductance Laplacians built
    here from the edge list, without touching the solver path.
    """
    n = net.n
    if n > max_n:
        raise NetworkError(f"oracle is capped at {max_n} vertices")
    if a == z:
        raise NetworkError("a and z must differ")
    lap = np.zeros((n, n))
    for (u, v), r in zip(net.edges.tolist(), net.resistance.tolist()):
        if math.isinf(r):
            continue
        c = 1.0 / r
        lap[u, u] += c
        lap[v, v] += c
        lap[u, v] -= c
        lap[v, u] -= c
    keep_a = [i for i in range(n) if i != a]
    keep_az = [i for i in range(n) if i != a and i != z]
    sign_t, log_t = np.linalg.slogdet(lap[np.ix_(keep_a, keep_a)])
    if sign_t <= 0:
        return INF
    if not keep_az:
        return float(1.0 / np.exp(log_t))
    sign_f, log_f = np.linalg.slogdet(lap[np.ix_(keep_az, keep_az)])
    return float(sign_f * np.exp(log_f - log_t))


def contract(net: Network, groups: Sequence[Iterable[int]]) -> tuple[Network, np.ndarray]:
    """Merge each group into one vertex, dropping edges that become loops.

    Returns the contracted network and the old-to-new vertex map.
    """
    mapping = -np.ones(net.n, dtype=np.int64)
    nxt = 0
    for grp in groups:
        grp = list(grp)
        mapping[grp] = nxt
        nxt += 1
    for v in range(net.n):
        if mapping[v] < 0:
            mapping[v] = nxt
            nxt += 1
    e = mapping[net.edges]
    keep = e[:, 0] != e[:, 1]
    return Network(nxt, e[keep], net.resistance[keep]), mapping
