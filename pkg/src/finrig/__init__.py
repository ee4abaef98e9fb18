"""Periodic-data rigidity experiments for expanding circle maps.

Set ``FINRIG_DISABLE_JIT=1`` before import to run the pure-numpy kernels
instead of the numba-compiled ones.
"""
from ._kernels import BACKEND_NAME
from .circle_map import (
    CircleMap,
    GridFunction,
    circle_distance,
    conjugate_map,
    doubling,
    inverse_branches,
    make_trig_map,
    map_from_spec,
    sample,
)
from .errors import BudgetError, ConvergenceError, PeriodicOrbitError, ValidationError
from .periodic import (
    BowenMeasure,
    PeriodicOrbitSet,
    birkhoff_sum,
    bowen_measure,
    discrete_cdf,
    integrate_discrete,
    partition_bound_check,
    periodic_points,
)
from .transfer import Density, apply_transfer, cdf, empirical_decay, invariant_density, inverse_cdf, pressure

__all__ = [
    "BACKEND_NAME",
    "BowenMeasure",
    "BudgetError",
    "CircleMap",
    "ConvergenceError",
    "Density",
    "GridFunction",
    "PeriodicOrbitError",
    "PeriodicOrbitSet",
    "ValidationError",
    "apply_transfer",
    "birkhoff_sum",
    "bowen_measure",
    "cdf",
    "circle_distance",
    "conjugate_map",
    "discrete_cdf",
    "doubling",
    "empirical_decay",
    "integrate_discrete",
    "invariant_density",
    "inverse_branches",
    "inverse_cdf",
    "make_trig_map",
    "map_from_spec",
    "partition_bound_check",
    "periodic_points",
    "pressure",
    "sample",
]
