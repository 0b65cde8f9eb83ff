"""Exact and Monte Carlo verification of Khintchine-type moment bounds for
zero-sum Rademacher sums, hypergeometric deviations, and Lipschitz
functionals on the symmetric group."""

__version__ = "0.1.0"

from .errors import CapacityError, ConstraintInfeasibleError, ParameterError, PreconditionError
from .reports import BoundReport
from .weights import WeightVector, as_weights

__all__ = [
    "BoundReport",
    "CapacityError",
    "ConstraintInfeasibleError",
    "ParameterError",
    "PreconditionError",
    "WeightVector",
    "as_weights",
]
