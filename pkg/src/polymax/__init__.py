"""Exact polyhedral (max-of-affine) functions over the rationals, and
oracle-based detection of integer-slope polyhedral structure."""

from .ratfun import AffineFunctional, IntegralityClass, Rat, group_membership, rat
from .polyfun import PolyhedralFunction, canonicalize, trop_add, trop_mul
from .polyhedron import RationalPolyhedron
from .oracle import Box, FunctionOracle, builtin_oracle, from_polyfun
from .detect1d import DetectOutcome, detect_integral_values, reconstruct_transintegral
from .detectnd import GridSpec, detect_on_skeleton, reconstruct_box, slope_bound
from .tropical import detect_tropical, is_tropical_polynomial

__all__ = [
    "AffineFunctional", "IntegralityClass", "Rat", "group_membership", "rat",
    "PolyhedralFunction", "canonicalize", "trop_add", "trop_mul",
    "RationalPolyhedron",
    "Box", "FunctionOracle", "builtin_oracle", "from_polyfun",
    "DetectOutcome", "detect_integral_values", "reconstruct_transintegral",
    "GridSpec", "detect_on_skeleton", "reconstruct_box", "slope_bound",
    "detect_tropical", "is_tropical_polynomial",
]

__version__ = "0.1.0"
