"""Command line interface: ``pll <subcommand> ...``.

Exit status is 0 only when every audit attached to the command passed,
1 when an audit failed and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from ._validation import check_graph, parse_vertex_list
from .electric import Flow, Network, effective_resistance, unit_current_flow
from .graph import GraphError, PlanarGraph

TANGENCY_TOL = 1e-6
ANGLE_TOL = 1e-8


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj, path=None):
    _emit(json.dumps(obj, sort_keys=True) + "\n", path)


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------


def cmd_gen(a) -> int:
    from . import generators as gen

    fam = a.family
    if fam == "sharpness":
        sg = gen.sharpness_graph(a.h, a.alpha)
        doc = sg.network.to_json()
        doc.update(apex=sg.apex, leaves=sg.leaves)
        _dump(doc, a.out)
        return 0
    if fam == "grid":
        g = gen.grid(a.n)
    elif fam == "cycle":
        g = gen.cycle(a.n)
    elif fam == "path":
        g = gen.path(a.n)
    elif fam == "binary-tree":
        g = gen.binary_tree(a.h)
    elif fam == "triangular":
        g = gen.triangular_disk(a.r)
    elif fam == "bipyramid":
        g = gen.bipyramid(a.n)
    elif fam == "flip":
        g = gen.flip_mcmc_triangulation(a.n, a.steps, a.seed, a.max_degree)
    elif fam == "plane":
        g = gen.random_plane_graph(a.n, a.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(fam)
    _dump(g.to_json(a.root), a.out)
    return 0


def cmd_pack(a) -> int:
    from .packing import normalize_at_root, pack_triangulation, ring_ratio_audit
    from .svg import render_packing_svg

    d = _load_json(a.inp)
    g = check_graph(d)
    root = a.root if a.root is not None else d.get("root", 0)
    boundary = parse_vertex_list(a.boundary) if a.boundary else None
    p = pack_triangulation(g, boundary, a.boundary_radius, tol=ANGLE_TOL, max_iter=a.max_iter)
    if a.normalize:
        p = normalize_at_root(p, root)
    tang = p.tangency_error()
    ok = tang <= TANGENCY_TOL and p.angle_error <= ANGLE_TOL
    if a.svg:
        _emit(render_packing_svg(p, root=root, edges=not a.no_edges), a.svg)
    doc = p.to_json()
    if a.out:
        _dump(doc, a.out)
    ring = ring_ratio_audit(p)
    audit = {"angle_error": p.angle_error, "tangency_error": tang, "ring_ratio": ring.ratio,
             "max_interior_degree": ring.max_degree, "iterations": p.n_iter, "passed": ok}
    sys.stdout.write(json.dumps(audit, sort_keys=True) + "\n")
    return 0 if ok else 1


def cmd_reff(a) -> int:
    net = Network.from_json(_load_json(a.net))
    r = effective_resistance(net, parse_vertex_list(a.A), parse_vertex_list(a.Z))
    sys.stdout.write(f"{r:.12g}\n")
    return 0


def cmd_walk(a) -> int:
    from .walks import avoidance_exact_small, avoidance_probability

    d = _load_json(a.inp)
    net = Network.from_json(d)
    if a.walk_cmd == "avoid":
        Ts = [int(t) for t in a.T.split(",")]
        rows = []
        for T in Ts:
            est = avoidance_probability(net, T, a.trials, a.seed, a.start)
            rows.append((T, est))
        if a.csv:
            with open(a.csv, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["T", "phi", "ci_lo", "ci_hi", "trials", "phi_log_T"])
                for T, est in rows:
                    w.writerow([T, est.phi, est.ci[0], est.ci[1], est.trials, est.phi * np.log(T)])
        if len(rows) == 1:
            _dump(rows[0][1].to_json())
        else:
            _dump([dict(T=T, **est.to_json()) for T, est in rows])
        return 0
    phi = avoidance_exact_small(net, a.T_exact, a.start)
    _dump({"phi": phi, "T": a.T_exact, "exact": True})
    return 0


def _flow_from_json(g: PlanarGraph, d: dict) -> Flow:
    net = Network.from_graph(g)
    if "values" in d:
        return Flow(net, np.asarray(d["values"], dtype=float), frozenset(d["sources"]), frozenset(d["sinks"]))
    return unit_current_flow(net, d["A"], d["Z"])


def cmd_startree(a) -> int:
    from .startree import exact_divergence_audit, lift_flow, star_tree_transform

    g = check_graph(_load_json(a.inp))
    st = star_tree_transform(g)
    if a.out:
        doc = {"n": st.graph.n, "rot": [list(r) for r in st.graph.rot], "edges": st.network.edges.tolist(),
               "R": st.network.resistance.tolist(), "mark": st.mark.tolist(), "code": st.code,
               "tree": st.edge_tree.tolist()}
        _dump(doc, a.out)
    ok = int(st.graph.degrees.max(initial=0)) <= 3
    report = {"n": st.graph.n, "max_degree": int(st.graph.degrees.max(initial=0))}
    if a.lift_flow:
        theta = _flow_from_json(g, _load_json(a.lift_flow))
        lift = lift_flow(g, theta, st)
        exact = exact_divergence_audit(g, theta, st)
        bound_ok = lift.energy_dagger <= 4 * lift.energy * (1 + 1e-12)
        report.update(E_theta=lift.energy, E_theta_prime=lift.energy_prime, E_theta_dagger=lift.energy_dagger,
                      divergence_exact=exact, energy_bound=bound_ok)
        ok = ok and exact and bound_ok and abs(lift.energy_prime - 2 * lift.energy) <= 1e-12 * max(1, lift.energy)
    report["passed"] = bool(ok)
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    return 0 if ok else 1


def cmd_supported(a) -> int:
    from .rng import stream
    from .supported import PointCloud, lemma_bound_shape, supported_points

    if a.inp:
        pts = np.asarray(_load_json(a.inp), dtype=float)
    else:
        pts = stream(a.seed, 0).random((a.random, 2))
    cloud = PointCloud(pts)
    res = supported_points(cloud, a.delta, a.s, a.oracle)
    _dump({"count": res.count, "witnesses": [int(w) for w in res.witnesses], "n": len(cloud),
           "bound_shape": lemma_bound_shape(len(cloud), a.delta, a.s)})
    return 0


def cmd_limit(a) -> int:
    from .limits import ball_histogram, degree_tail

    g = check_graph(_load_json(a.inp))
    if a.limit_cmd == "hist":
        h = ball_histogram(g, a.r, a.samples, a.mode, a.seed, census=a.census or a.samples is None)
        _dump(h.to_json(), a.out)
        return 0
    tail = degree_tail(g, a.mode, power=a.power, k_min=a.k_min)
    lines = ["k,exceed,count,neighbor_max_exceed"]
    lines += [f"{k},{p!r},{c},{q!r}" for k, p, c, q in tail.rows()]
    _emit("\n".join(lines) + "\n", a.out)
    sys.stderr.write(json.dumps({"slope": tail.slope, "r2": tail.r2, "power": tail.power}) + "\n")
    return 0


def _parse_param(text):
    if "=" not in text:
        raise ValueError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def cmd_experiment(a) -> int:
    from .experiments import ExperimentRecipe, run_experiment

    params = dict(_parse_param(p) for p in a.param)
    seeds = parse_vertex_list(a.seeds)
    report = run_experiment(ExperimentRecipe(a.name, params, seeds, a.out))
    sys.stdout.write(json.dumps({"recipe": a.name, "passed": report.passed}, sort_keys=True) + "\n")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pll", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a graph family")
    g.add_argument("--family", required=True,
                   choices=["grid", "cycle", "path", "binary-tree", "triangular", "bipyramid", "flip", "plane",
                            "sharpness"])
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--h", type=int, default=4)
    g.add_argument("--r", type=int, default=4)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--steps", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-degree", type=int, default=None)
    g.add_argument("--root", type=int, default=None)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen)

    k = sub.add_parser("pack", help="circle-pack a triangulation")
    k.add_argument("--in", dest="inp", required=True)
    k.add_argument("--boundary", help="outer face vertices, comma separated")
    k.add_argument("--boundary-radius", type=float, default=1.0)
    k.add_argument("--root", type=int)
    k.add_argument("--normalize", action="store_true", help="move the root circle to the unit circle")
    k.add_argument("--max-iter", type=int, default=100_000)
    k.add_argument("--svg")
    k.add_argument("--no-edges", action="store_true")
    k.add_argument("--out")
    k.set_defaults(fn=cmd_pack)

    r = sub.add_parser("reff", help="effective resistance between vertex sets")
    r.add_argument("--net", required=True)
    r.add_argument("--A", required=True)
    r.add_argument("--Z", required=True)
    r.set_defaults(fn=cmd_reff)

    w = sub.add_parser("walk", help="random-walk avoidance probabilities")
    wsub = w.add_subparsers(dest="walk_cmd", required=True)
    wa = wsub.add_parser("avoid", help="Monte Carlo estimate")
    wa.add_argument("--in", dest="inp", required=True)
    wa.add_argument("--T", required=True, help="horizon, or a comma-separated list")
    wa.add_argument("--trials", type=int, default=10_000)
    wa.add_argument("--seed", type=int, default=0)
    wa.add_argument("--start", choices=["uniform", "stationary"], default="uniform")
    wa.add_argument("--csv")
    we = wsub.add_parser("exact", help="exact value on a small graph")
    we.add_argument("--in", dest="inp", required=True)
    we.add_argument("--T", dest="T_exact", type=int, required=True)
    we.add_argument("--start", choices=["uniform", "stationary"], default="uniform")
    w.set_defaults(fn=cmd_walk)

    s = sub.add_parser("startree", help="star-tree transform and flow lift")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out")
    s.add_argument("--lift-flow", help='JSON with {"values","sources","sinks"} or {"A","Z"}')
    s.set_defaults(fn=cmd_startree)

    u = sub.add_parser("supported", help="count (delta, s)-supported points")
    src = u.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="inp", help="JSON list of [x, y] points")
    src.add_argument("--random", type=int, help="this many uniform points in the unit square")
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--delta", type=float, required=True)
    u.add_argument("--s", type=int, required=True)
    u.add_argument("--oracle", choices=["exact", "grid"], default="exact")
    u.set_defaults(fn=cmd_supported)

    lim = sub.add_parser("limit", help="ball histograms and degree tails")
    lsub = lim.add_subparsers(dest="limit_cmd", required=True)
    lh = lsub.add_parser("hist")
    lh.add_argument("--in", dest="inp", required=True)
    lh.add_argument("--r", type=int, required=True)
    lh.add_argument("--mode", choices=["uniform", "stationary"], default="uniform")
    lh.add_argument("--census", action="store_true")
    lh.add_argument("--samples", type=int)
    lh.add_argument("--seed", type=int, default=0)
    lh.add_argument("--out")
    lt = lsub.add_parser("tail")
    lt.add_argument("--in", dest="inp", required=True)
    lt.add_argument("--mode", choices=["uniform", "stationary"], default="uniform")
    lt.add_argument("--power", type=float, default=1.0)
    lt.add_argument("--k-min", type=int, default=1)
    lt.add_argument("--out")
    lim.set_defaults(fn=cmd_limit)

    e = sub.add_parser("experiment", help="run a built-in recipe")
    e.add_argument("name")
    e.add_argument("--param", action="append", default=[], help="key=value (value parsed as JSON)")
    e.add_argument("--seeds", default="0")
    e.add_argument("--out", help="directory for <name>.csv and <name>.json")
    e.set_defaults(fn=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (GraphError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"pll: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
