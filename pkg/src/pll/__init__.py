"""Planar graph limits: circle packings, electrical networks, the star-tree
transform and random-walk experiments."""

__version__ = "0.1.0"

from .canonical import canonical_code, code_hex, rooted_distance  # noqa: E402
from .electric import (  # noqa: E402
    Flow,
    Network,
    commute_time,
    dirichlet_energy,
    effective_resistance,
    escape_probability,
    reff_matrix_tree_oracle,
    splice_flow,
    unit_current_flow,
)
from .graph import Ball, PlanarGraph, RootedGraph, ball  # noqa: E402
from .packing import CirclePacker, CirclePacking, normalize_at_root, pack_triangulation  # noqa: E402
from .startree import StarTreeTransformer, lift_flow, star_tree_transform, subdivide  # noqa: E402
from .walks import AvoidanceEstimator, avoidance_exact_small, avoidance_probability, simulate_walk  # noqa: E402

__all__ = [
    "AvoidanceEstimator",
    "Ball",
    "CirclePacker",
    "CirclePacking",
    "Flow",
    "Network",
    "PlanarGraph",
    "RootedGraph",
    "StarTreeTransformer",
    "avoidance_exact_small",
    "avoidance_probability",
    "ball",
    "canonical_code",
    "code_hex",
    "commute_time",
    "dirichlet_energy",
    "effective_resistance",
    "escape_probability",
    "lift_flow",
    "normalize_at_root",
    "pack_triangulation",
    "reff_matrix_tree_oracle",
    "rooted_distance",
    "simulate_walk",
    "splice_flow",
    "star_tree_transform",
    "subdivide",
    "unit_current_flow",
]
