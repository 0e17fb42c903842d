"""Cycles in projective coordinates and their invariant pairing.

A cycle is the solution set of  k x.conj x - l.conj x - x l.conj + m = 0,
stored as the coefficient row (k, l_1..l_n, m) up to a common factor.  The
same row is the 2x2 matrix [[l, m], [k, l.conj]] over a Clifford algebra,
and Moebius maps act on it by M C M*.

Two signatures matter and they need not agree: the point metric fixes which
curve the row draws (circle, parabola, equilateral hyperbola in 2D), while
the product metric fixes the invariant pairing used by every relation.
Both are kept as tuples of generator squares, -1/0/+1 per axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .clifford import Mat2, Mv, Signature
from .numerics import Arithmetic, Scalar, format_scalar, is_exact, parse_scalar, to_float

Eta = Tuple[int, ...]


def signature_from_eta(eta: Eta) -> Signature:
    """Clifford signature whose generator squares read off as eta, in order."""
    p = sum(1 for s in eta if s == -1)
    q = sum(1 for s in eta if s == 1)
    r = sum(1 for s in eta if s == 0)
    sig = Signature(p, q, r)
    if sig.squares() != tuple(eta):
        raise ValueError(f"eta {eta} is not ordered as (-1.., +1.., 0..)")
    return sig


_NAMED = {"e": -1, "p": 0, "h": 1}


@dataclass(frozen=True)
class Metric:
    point_eta: Eta
    product_eta: Eta

    def __post_init__(self):
        if len(self.point_eta) != len(self.product_eta):
            raise ValueError("point and product metrics must share the dimension")
        signature_from_eta(self.product_eta)  # validates ordering

    @staticmethod
    def named(name: str) -> "Metric":
        """2D planes: 'e'/'p'/'h' with matching point and product metrics."""
        if name not in _NAMED:
            raise ValueError(f"unknown metric name {name!r}")
        eta = (-1, _NAMED[name])
        return Metric(eta, eta)

    @staticmethod
    def from_signature(p: int, q: int = 0, r: int = 0) -> "Metric":
        eta = Signature(p, q, r).squares()
        return Metric(eta, eta)

    @property
    def n(self) -> int:
        return len(self.product_eta)

    @property
    def tau(self) -> int:
        """2D point-space flavour: -1 elliptic, 0 parabolic, +1 hyperbolic."""
        if self.n != 2:
            raise ValueError("tau is a 2D notion")
        return self.point_eta[1]

    @property
    def sigma(self) -> int:
        """2D product-space flavour."""
        if self.n != 2:
            raise ValueError("sigma is a 2D notion")
        return self.product_eta[1]

    def product_signature(self) -> Signature:
        return signature_from_eta(self.product_eta)

    def label(self) -> str:
        for name, s in _NAMED.items():
            if self.point_eta == self.product_eta == (-1, s):
                return name
        sig = self.product_signature()
        body = f"{sig.p},{sig.q},{sig.r}"
        if self.point_eta != self.product_eta:
            body += "|point=" + ",".join(str(s) for s in self.point_eta)
        return body


def parse_metric(text: str) -> Metric:
    text = text.strip()
    if text in _NAMED:
        return Metric.named(text)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 3 and all(p.lstrip("-").isdigit() for p in parts):
        return Metric.from_signature(*(int(p) for p in parts))
    raise ValueError(f"cannot parse metric {text!r}")


class Cycle:
    """One coefficient row (k, l_1..l_n, m) over a fixed metric."""

    __slots__ = ("metric", "k", "l", "m")

    def __init__(self, metric: Metric, k: Scalar, l: Sequence[Scalar], m: Scalar):
        lt = tuple(l)
        if len(lt) != metric.n:
            raise ValueError(f"expected {metric.n} direction components, got {len(lt)}")
        self.metric = metric
        self.k = k
        self.l = lt
        self.m = m

    # -- constructors -------------------------------------------------------
    @staticmethod
    def from_row(metric: Metric, row: Sequence[Scalar]) -> "Cycle":
        row = list(row)
        if len(row) != metric.n + 2:
            raise ValueError(f"row of length {metric.n + 2} expected")
        return Cycle(metric, row[0], row[1:-1], row[-1])

    @staticmethod
    def zero_radius_at(metric: Metric, point: Sequence[Scalar]) -> "Cycle":
        """The point as a cycle: k=1, l_i = -eta_i x_i, m = sum -eta_i x_i^2.

        Uses the product metric, so the self-pairing is identically zero and
        pairing against any cycle is the incidence test.
        """
        pt = tuple(point)
        if len(pt) != metric.n:
            raise ValueError("point dimension mismatch")
        eta = metric.product_eta
        l = tuple(-eta[i] * pt[i] for i in range(metric.n))
        m = sum((-eta[i]) * pt[i] * pt[i] for i in range(metric.n))
        return Cycle(metric, 1, l, m)

    @staticmethod
    def real_line(metric: Metric) -> "Cycle":
        """The boundary hyperplane x_n = 0."""
        l = tuple(0 for _ in range(metric.n - 1)) + (1,)
        return Cycle(metric, 0, l, 0)

    @staticmethod
    def infinity(metric: Metric) -> "Cycle":
        """The zero-radius cycle at infinity; pairing with it reads off k."""
        return Cycle(metric, 0, tuple(0 for _ in range(metric.n)), 1)

    @staticmethod
    def circle(metric: Metric, center: Sequence[Scalar], radius_sq: Scalar) -> "Cycle":
        """k=1 cycle with a given point-metric center and squared radius."""
        c = tuple(center)
        etap = metric.point_eta
        if any(s == 0 for s in etap):
            raise ValueError("center/radius need a non-degenerate point metric")
        l = tuple(-etap[i] * c[i] for i in range(metric.n))
        m = sum((-etap[i]) * c[i] * c[i] for i in range(metric.n)) - radius_sq
        return Cycle(metric, 1, l, m)

    # -- row access -----------------------------------------------------------
    def row(self) -> Tuple[Scalar, ...]:
        return (self.k,) + self.l + (self.m,)

    def scaled(self, factor: Scalar) -> "Cycle":
        return Cycle(self.metric, self.k * factor,
                     tuple(c * factor for c in self.l), self.m * factor)

    def mirror(self) -> "Cycle":
        """Reflection in the boundary hyperplane: flips the last direction."""
        l = self.l[:-1] + (-self.l[-1],)
        return Cycle(self.metric, self.k, l, self.m)

    def map_coeffs(self, f) -> "Cycle":
        return Cycle(self.metric, f(self.k), tuple(f(c) for c in self.l), f(self.m))

    def as_float(self) -> "Cycle":
        return self.map_coeffs(to_float)

    # -- invariant pairing ------------------------------------------------------
    def product(self, other: "Cycle") -> Scalar:
        """<C, C'> = m k' + m' k + 2 sum eta_i l_i l'_i (product metric)."""
        if other.metric.product_eta != self.metric.product_eta:
            raise ValueError("product metric mismatch")
        eta = self.metric.product_eta
        acc = self.m * other.k + other.m * self.k
        for i in range(self.metric.n):
            if eta[i] != 0:
                acc = acc + 2 * eta[i] * self.l[i] * other.l[i]
        return acc

    def self_product(self) -> Scalar:
        return self.product(self)

    def det(self) -> Scalar:
        """det [[l, m], [k, l.conj]] = -<C,C>/2; k^2 rho^2 for real circles."""
        eta = self.metric.product_eta
        acc = -(self.k * self.m)
        for i in range(self.metric.n):
            acc = acc + (-eta[i]) * self.l[i] * self.l[i]
        return acc

    def trace_product(self, other: "Cycle") -> Scalar:
        """Scalar part of tr(C C'); the matrix-side view of product()."""
        prod = self.matrix() * other.matrix()
        return (prod.a + prod.d).scalar_part()

    def normalized_product(self, other: "Cycle", ar: Optional[Arithmetic] = None):
        """<C,C'> / sqrt|<C,C>| sqrt|<C',C'>|; classical inversive distance
        for pairs of real circles."""
        num = self.product(other)
        s1, s2 = self.self_product(), other.self_product()
        if s1 == 0 or s2 == 0:
            raise ZeroDivisionError("normalized product undefined for point cycles")
        ar = ar or Arithmetic("float")
        root = ar.sqrt(s1 * s2)  # sqrt|s1| sqrt|s2| in one radical
        if not is_exact(root) and is_exact(num):
            num = to_float(num)
        return num / root

    # -- drawn geometry (point metric) -----------------------------------------
    def is_flat(self) -> bool:
        return self.k == 0

    def is_zero_radius(self, eps: float = 0.0) -> bool:
        d = self.det()
        if is_exact(d):
            return d == 0
        scale = max(abs(to_float(c)) for c in self.row()) or 1.0
        return abs(d) <= eps * scale * scale

    def center(self) -> Tuple[Scalar, ...]:
        """Point-metric center -eta^p_i l_i / k; what the drawing shows."""
        if self.k == 0:
            raise ZeroDivisionError("flat cycles have no center")
        etap = self.metric.point_eta
        return tuple(_div((-etap[i]) * self.l[i], self.k) for i in range(self.metric.n))

    def radius_sq(self) -> Scalar:
        """(sum -eta^p_i l_i^2 - k m) / k^2 in the point metric."""
        if self.k == 0:
            raise ZeroDivisionError("flat cycles have no radius")
        etap = self.metric.point_eta
        acc = -(self.k * self.m)
        for i in range(self.metric.n):
            acc = acc + (-etap[i]) * self.l[i] * self.l[i]
        return _div(acc, self.k * self.k)

    def value_at(self, point: Sequence[Scalar]) -> Scalar:
        """The defining polynomial k sum(-eta^p_i x_i^2) - 2 sum l_i x_i + m."""
        pt = tuple(point)
        etap = self.metric.point_eta
        acc = self.m
        for i in range(self.metric.n):
            acc = acc + self.k * (-etap[i]) * pt[i] * pt[i] - 2 * self.l[i] * pt[i]
        return acc

    def passes_through(self, point: Sequence[Scalar], eps: float = 0.0) -> bool:
        v = self.value_at(point)
        if is_exact(v):
            return v == 0
        scale = max(abs(to_float(c)) for c in self.row()) or 1.0
        return abs(v) <= eps * scale

    # -- matrix form and Moebius action ------------------------------------------
    def matrix(self) -> Mat2:
        sig = self.metric.product_signature()
        lv = Mv.vector(sig, self.l)
        return Mat2(sig, lv, self.m, self.k, lv.conj())

    def flt(self, M: Mat2) -> "Cycle":
        """Image under x -> (ax+b)(cx+d)^{-1}, i.e. the row of M C M*.

        Exact rows must come back in exact shape; float rows are allowed
        rounding residue in the components that vanish identically."""
        sig = self.metric.product_signature()
        if M.sig != sig:
            raise ValueError("map acts on a different product signature")
        out = M * self.matrix() * M.star()
        tol = _shape_tol(out)
        k2, m2 = out.c, out.b
        if _off_grade(k2, 0, tol) or _off_grade(m2, 0, tol):
            raise ValueError("image is not a cycle matrix")
        if _off_grade(out.a, 1, tol):
            raise ValueError("image direction is not a vector")
        l2 = out.a.grade(1)
        mismatch = out.d - l2.conj()
        if mismatch.terms and (tol is None or _mv_peak(mismatch) > tol):
            raise ValueError("image matrix lost its shape")
        return Cycle(self.metric, k2.scalar_part(), l2.vector_components(),
                     m2.scalar_part())

    # -- canonical representative ---------------------------------------------
    def canonical(self, eps: float = 1e-12) -> "Cycle":
        """Scale so the first significant coefficient is 1; exact rows stay
        in their field, float rows are normalized against the largest entry."""
        row = self.row()
        if all(is_exact(c) for c in row):
            pivot = next((c for c in row if c != 0), None)
            if pivot is None:
                return self
            return self.scaled(1 / pivot if not isinstance(pivot, int) else Fraction(1, 1) / pivot)
        fr = [to_float(c) for c in row]
        scale = max(abs(v) for v in fr)
        if scale == 0:
            return self.as_float()
        # divide by the largest entry (bounded result), signed so the first
        # significant coefficient comes out positive, like the exact branch
        lead = next(v for v in fr if abs(v) > eps * scale)
        div = scale if lead > 0 else -scale
        return Cycle(self.metric, *_split(tuple(v / div for v in fr)))

    def key(self, digits: int = 9):
        """Hashable projective key for dedup and deterministic ordering."""
        can = self.canonical()
        out = []
        for c in can.row():
            if is_exact(c):
                out.append(c)
            else:
                v = round(c, digits)
                out.append(0.0 if v == 0 else v)  # kill -0.0
        return tuple(out)

    # -- serialization -----------------------------------------------------------
    def to_obj(self) -> dict:
        enc = lambda c: format_scalar(c) if is_exact(c) else float(c)
        return {"k": enc(self.k), "l": [enc(c) for c in self.l], "m": enc(self.m)}

    @staticmethod
    def from_obj(metric: Metric, obj: dict) -> "Cycle":
        dec = lambda c: parse_scalar(c, "exact") if isinstance(c, str) else c
        return Cycle(metric, dec(obj["k"]), [dec(c) for c in obj["l"]], dec(obj["m"]))

    # -- misc ---------------------------------------------------------------------
    def __eq__(self, other):
        return (isinstance(other, Cycle) and self.metric == other.metric
                and self.row() == other.row())

    def __hash__(self):
        return hash((self.metric, self.row()))

    def same_cycle(self, other: "Cycle", digits: int = 9) -> bool:
        """Projective equality up to scale (and rounding for float rows)."""
        return self.metric == other.metric and self.key(digits) == other.key(digits)

    def __repr__(self):
        parts = ", ".join(format_scalar(c) if is_exact(c) else repr(c)
                          for c in self.row())
        return f"Cycle[{self.metric.label()}]({parts})"


def _div(num, den):
    """Division that keeps integer rows in the rationals."""
    return (Fraction(num) if isinstance(num, int) else num) / den


def _mv_peak(mv: Mv) -> float:
    return max((abs(to_float(c)) for c in mv.terms.values()), default=0.0)


def _shape_tol(out: Mat2) -> Optional[float]:
    """None demands exact shape; float entries get a relative allowance."""
    coeffs = [c for part in (out.a, out.b, out.c, out.d)
              for c in part.terms.values()]
    if all(is_exact(c) for c in coeffs):
        return None
    scale = max([1.0] + [abs(to_float(c)) for c in coeffs])
    return 1e-9 * scale


def _off_grade(mv: Mv, k: int, tol: Optional[float]) -> bool:
    stray = mv - mv.grade(k)
    if not stray.terms:
        return False
    return tol is None or _mv_peak(stray) > tol


def _split(row):
    return row[0], row[1:-1], row[-1]
