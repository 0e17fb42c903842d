"""cyclekit: cycles, Moebius maps and constraint figures over Clifford algebras."""

from .numerics import Arithmetic, QuadExt, parse_scalar, format_scalar
from .clifford import Signature, Mv, Mat2, INFINITY, euclidean, mobius_apply
from .cycle import Cycle, Metric
from .relations import Relation, solve, check
from .poincare import extension_from_triple, classify_intervals, angle_to_real_line
from .contfrac import ContinuedFraction, chain, convergents, seidel_stern_check
from .figure import (Figure, NinePointResult, nine_point_figure,
                     loxodrome_triples_equivalent, orthogonal, tangent,
                     inversive, power, through, is_point, only_reals)

__all__ = [
    "Arithmetic", "QuadExt", "parse_scalar", "format_scalar",
    "Signature", "Mv", "Mat2", "INFINITY", "euclidean", "mobius_apply",
    "Cycle", "Metric",
    "Relation", "solve", "check",
    "extension_from_triple", "classify_intervals", "angle_to_real_line",
    "ContinuedFraction", "chain", "convergents", "seidel_stern_check",
    "Figure", "NinePointResult", "nine_point_figure",
    "loxodrome_triples_equivalent", "orthogonal", "tangent", "inversive",
    "power", "through", "is_point", "only_reals",
]

__version__ = "0.1.0"
