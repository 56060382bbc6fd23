"""Convex lattice chains: exact counting, grand-canonical sampling,
asymptotic constants and limit shapes, at desk scale."""

from .errors import BudgetError, CalibrationError, ConvChainError, DomainError
from .lattice import Direction, enumerate_directions, direction_density, xn_aggregate
from .chain import ConvexChain, VertexMap, ChainStats, decode, encode, stats
from .exactcount import (
    CountTable,
    count_bruteforce,
    count_exact,
    log_count_normalized,
    max_vertices_exact,
)
from .analytic import (
    JarnikConstants,
    Theorem1Constants,
    invert_c,
    jarnik_constants,
    max_vertices_constant,
    polylog,
    random_max_bound,
    renyi_sulanke_constant,
    theorem1_constants,
)
from .ensemble import (
    Constraint,
    CountEstimate,
    EnsembleParams,
    MomentReport,
    angular_masses,
    calibrate,
    covariance,
    estimate_count,
    marginal,
    moments,
    sample,
    sample_conditioned,
    sample_conditioned_many,
    weight,
)
from .shapes import CurveSpec, circle, family_curve, parabola, solve_family_parameter, sup_distance
from .randommodel import convex_probability_mc, is_convex_through_corners

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "CalibrationError", "ConvChainError", "DomainError",
    "Direction", "enumerate_directions", "direction_density", "xn_aggregate",
    "ConvexChain", "VertexMap", "ChainStats", "decode", "encode", "stats",
    "CountTable", "count_bruteforce", "count_exact", "log_count_normalized",
    "max_vertices_exact",
    "JarnikConstants", "Theorem1Constants", "invert_c", "jarnik_constants",
    "max_vertices_constant", "polylog", "random_max_bound",
    "renyi_sulanke_constant", "theorem1_constants",
    "Constraint", "CountEstimate", "EnsembleParams", "MomentReport",
    "angular_masses", "calibrate", "covariance", "estimate_count", "marginal",
    "moments", "sample", "sample_conditioned", "sample_conditioned_many",
    "weight",
    "CurveSpec", "circle", "family_curve", "parabola",
    "solve_family_parameter", "sup_distance",
    "convex_probability_mc", "is_convex_through_corners",
    "__version__",
]
