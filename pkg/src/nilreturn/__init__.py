"""First-return map of planar nilpotent monodromic singularities.

The series ``Z(eps) = eps + sum Z_n eps**n`` is computed by the quadrant
matching recursion (:func:`return_map`) and checked against direct
integration (:mod:`nilreturn.oracle`).
"""

from .errors import (
    AssumptionViolation,
    NilReturnError,
    NumericError,
    ValidationError,
)
from .oracle import numeric_return, order_fit, verify
from .retmap import Classification, ReturnMapResult, classify, closed_form_leading, return_map
from .series import CoeffSeries
from .sysnorm import NormalizedSystem, SystemSpec, normalize, quadrant_transform
from .vsolver import VSolution, solve_v

__all__ = [
    "AssumptionViolation",
    "Classification",
    "CoeffSeries",
    "NilReturnError",
    "NormalizedSystem",
    "NumericError",
    "ReturnMapResult",
    "SystemSpec",
    "VSolution",
    "ValidationError",
    "classify",
    "closed_form_leading",
    "normalize",
    "numeric_return",
    "order_fit",
    "quadrant_transform",
    "return_map",
    "solve_v",
    "verify",
]
