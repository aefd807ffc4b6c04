"""Input checks shared by the estimators, the experiments and the CLI."""

from __future__ import annotations

import json
import os
from numbers import Integral, Real

from .graph import GraphError, PlanarGraph


def check_graph(X, require_connected: bool = False, require_plane: bool = False) -> PlanarGraph:
    """Accept a PlanarGraph, a JSON dict or a path to a JSON file."""
    if isinstance(X, PlanarGraph):
        g = X
    elif isinstance(X, dict):
        g = PlanarGraph.from_json(X)
    elif isinstance(X, (str, os.PathLike)):
        with open(X) as fh:
            g = PlanarGraph.from_json(json.load(fh))
    else:
        raise TypeError(f"expected a PlanarGraph, dict or path, got {type(X).__name__}")
    if require_connected and not g.is_connected():
        raise GraphError("graph must be connected")
    if require_plane and not g.is_plane():
        raise GraphError("rotation system is not planar")
    return g


def check_vertex_set(S, n: int, name: str = "vertex set", allow_empty: bool = True) -> frozenset:
    if isinstance(S, Integral):
        S = [S]
    out = frozenset(int(v) for v in S)
    if not allow_empty and not out:
        raise ValueError(f"{name} must be nonempty")
    bad = [v for v in out if not 0 <= v < n]
    if bad:
        raise ValueError(f"{name} has vertices out of range: {sorted(bad)[:5]}")
    return out


def check_int(value, name: str, low: int | None = None, high: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if low is not None and value < low:
        raise ValueError(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ValueError(f"{name} must be <= {high}, got {value}")
    return int(value)


def check_real(value, name: str, low: float | None = None, high: float | None = None, open_interval: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValueError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if low is not None and (v < low or (open_interval and v == low)):
        raise ValueError(f"{name} must be {'>' if open_interval else '>='} {low}, got {v}")
    if high is not None and (v > high or (open_interval and v == high)):
        raise ValueError(f"{name} must be {'<' if open_interval else '<='} {high}, got {v}")
    return v


def parse_vertex_list(text: str) -> list[int]:
    """'0,1,5' -> [0, 1, 5]."""
    text = text.strip()
    if not text:
        return []
    return [int(t) for t in text.split(",")]
