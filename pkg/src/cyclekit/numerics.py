"""Scalar arithmetic for the geometry engine.

Three interoperable scalar kinds:

* exact rationals -- ``fractions.Fraction``;
* :class:`QuadExt` -- numbers ``a + b*sqrt(d)`` with rational ``a, b`` and a
  fixed positive non-square rational radicand ``d`` (one radicand per solve);
* ``float``.

Exact kinds never lose precision; a computation that would need a second
independent radical is demoted to float explicitly (see :class:`Arithmetic`),
never silently.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

DEFAULT_EPS = 1e-9

Rational = Union[int, Fraction]


def comparison_eps(override: Optional[float] = None) -> float:
    """Default comparison tolerance; the MOEBINV_EPS env var overrides it."""
    if override is not None:
        return override
    raw = os.environ.get("MOEBINV_EPS")
    if raw:
        try:
            return float(raw)
        except ValueError:
            pass
    return DEFAULT_EPS


def fraction_sqrt(x: Rational) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None."""
    x = Fraction(x)
    if x < 0:
        return None
    if x == 0:
        return Fraction(0)
    pn, pd = x.numerator, x.denominator
    rn, rd = math.isqrt(pn), math.isqrt(pd)
    if rn * rn == pn and rd * rd == pd:
        return Fraction(rn, rd)
    return None


def radical_parts(x: Rational):
    """Split positive x into (coeff, core) with x = coeff^2 * core.

    core is a squarefree integer, so equal radicals built from different
    inputs agree representation-wise.  Square factors hiding behind primes
    above the trial-division bound stay in core; that only leaves the
    result less reduced, never wrong.
    """
    x = Fraction(x)
    n = x.numerator * x.denominator
    s, core, m, f = 1, 1, n, 2
    while f * f <= m and f <= 100_000:
        if m % f == 0:
            e = 0
            while m % f == 0:
                m //= f
                e += 1
            s *= f ** (e // 2)
            if e % 2:
                core *= f
        f += 1 if f == 2 else 2
    return Fraction(s, x.denominator), Fraction(core * m)


class RadicalClash(ArithmeticError):
    """A value needs a radical that does not live in the current field."""


class QuadExt:
    """``a + b*sqrt(d)`` with rational components and fixed radicand ``d``.

    ``d`` must be a positive non-square rational.  Mixed arithmetic with
    ints and Fractions lifts them; mixing two different radicands raises
    :class:`RadicalClash` (the solver catches that and demotes to float).
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = Fraction(d)
        if self.d <= 0 or fraction_sqrt(self.d) is not None:
            raise ValueError(f"radicand must be positive and non-square: {d}")

    # -- coercion ---------------------------------------------------------
    def _lift(self, other) -> Optional["QuadExt"]:
        if isinstance(other, QuadExt):
            if other.d != self.d:
                if other.b == 0:
                    return QuadExt(other.a, 0, self.d)
                if self.b == 0:
                    return other  # handled by caller symmetry
                raise RadicalClash(f"sqrt({self.d}) vs sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExt(other, 0, self.d)
        return None

    def collapse(self) -> Union[Fraction, "QuadExt"]:
        """Return a plain Fraction when the radical part vanished."""
        return self.a if self.b == 0 else self

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if isinstance(o, QuadExt) and o.d != self.d:  # self.b == 0 case
            return QuadExt(self.a + o.a, o.b, o.d)
        return QuadExt(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if isinstance(o, QuadExt) and o.d != self.d:  # self.b == 0
            return QuadExt(self.a * o.a, self.a * o.b, o.d)
        return QuadExt(self.a * o.a + self.b * o.b * self.d,
                       self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def _inverse(self) -> "QuadExt":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero QuadExt")
        return QuadExt(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if isinstance(o, QuadExt) and o.d != self.d:
            return QuadExt(self.a, 0, o.d) / o
        return self * o._inverse()

    def __rtruediv__(self, other):
        return self._inverse() * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = QuadExt(1, 0, self.d)
        for _ in range(n):
            out = out * self
        return out

    # -- comparisons ------------------------------------------------------
    def _sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return -1 if a < 0 else (0 if a == 0 else 1)
        if a == 0:
            return -1 if b < 0 else 1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * self.d
        if a > 0:
            return 1 if lhs > rhs else (-1 if lhs < rhs else 0)
        return -1 if lhs > rhs else (1 if lhs < rhs else 0)

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            if other.d == self.d:
                return self.a == other.a and self.b == other.b
            return self.b == 0 and other.b == 0 and self.a == other.a
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def _cmp(self, other) -> int:
        o = self._lift(other)
        if o is None:
            raise TypeError(f"cannot compare QuadExt with {type(other)}")
        return (self - o)._sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __abs__(self):
        return -self if self._sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.d))

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, sqrt={self.d})"


Scalar = Union[int, Fraction, QuadExt, float]


def is_exact(x: Scalar) -> bool:
    return isinstance(x, (int, Fraction, QuadExt))


def to_float(x: Scalar) -> float:
    return float(x)


def scalar_sign(x: Scalar) -> int:
    if isinstance(x, QuadExt):
        return x._sign()
    return -1 if x < 0 else (0 if x == 0 else 1)


def sqrt_in_field(x, d: Optional[Fraction] = None):
    """Exact sqrt of a non-negative exact scalar inside Q or Q(sqrt(d)).

    Returns the root, or None when it does not exist in that field.
    """
    if isinstance(x, QuadExt):
        if x.b != 0:
            return None  # nested radical
        x = x.a
    x = Fraction(x)
    r = fraction_sqrt(x)
    if r is not None:
        return r
    if d is not None and x > 0:
        t = fraction_sqrt(x / d)
        if t is not None:
            return QuadExt(0, t, d)
    return None


@dataclass
class Arithmetic:
    """Per-solve arithmetic context: exact or float, one radicand, demotions."""

    mode: str = "exact"  # "exact" | "float"
    eps: Optional[float] = None
    radicand: Optional[Fraction] = None
    demoted: bool = False
    notes: list = field(default_factory=list)

    def clone(self) -> "Arithmetic":
        return Arithmetic(self.mode, self.eps, self.radicand, False, [])

    @property
    def exact(self) -> bool:
        return self.mode == "exact" and not self.demoted

    def tol(self) -> float:
        return self.eps if self.eps is not None else comparison_eps()

    def lift(self, x: Scalar) -> Scalar:
        return x if self.exact else to_float(x)

    def demote(self, why: str) -> None:
        if not self.demoted:
            self.demoted = True
            self.notes.append(why)

    def sqrt(self, x: Scalar) -> Scalar:
        """sqrt(|x|); stays exact when one shared radicand suffices."""
        if isinstance(x, float) or not self.exact:
            return math.sqrt(abs(to_float(x)))
        x = abs(x) if not isinstance(x, QuadExt) else abs(x)
        r = sqrt_in_field(x, self.radicand)
        if r is not None:
            return r
        if isinstance(x, QuadExt) and x.b != 0:
            self.demote(f"nested radical sqrt({x!r})")
            return math.sqrt(abs(to_float(x)))
        x = Fraction(x) if not isinstance(x, QuadExt) else x.a
        if self.radicand is None:
            coeff, core = radical_parts(x)
            self.radicand = core
            return QuadExt(0, coeff, core)
        self.demote(f"second radicand {x} incompatible with {self.radicand}")
        return math.sqrt(to_float(x))

    def is_zero(self, x: Scalar) -> bool:
        if is_exact(x) and self.exact:
            return x == 0
        return abs(to_float(x)) <= self.tol()

    def eq(self, x: Scalar, y: Scalar) -> bool:
        if is_exact(x) and is_exact(y) and self.exact:
            return x == y
        return abs(to_float(x) - to_float(y)) <= self.tol()


def parse_scalar(text: str, mode: str = "exact") -> Scalar:
    """Parse 'p/q', 'a+b*sqrt(d)' and decimal forms.

    Decimals become Fractions in exact mode and floats in float mode.
    """
    s = text.strip().replace(" ", "")
    if "sqrt" in s:
        return _parse_quadext(s)
    if "/" in s:
        p, q = s.split("/", 1)
        return Fraction(int(p), int(q))
    if mode == "float":
        return float(s)
    return Fraction(s)


def _parse_quadext(s: str) -> QuadExt:
    # forms: [a+]b*sqrt(d), sqrt(d), -sqrt(d), a-b*sqrt(d)
    idx = s.find("sqrt(")
    if not s.endswith(")"):
        raise ValueError(f"bad scalar: {s}")
    d = Fraction(s[idx + 5:-1]) if "/" not in s[idx + 5:-1] else _frac(s[idx + 5:-1])
    head = s[:idx]
    if head.endswith("*"):
        head = head[:-1]
    # split head into a-part and b-part at the last +/- not at position 0
    a, b = Fraction(0), Fraction(1)
    if head in ("", "+"):
        pass
    elif head == "-":
        b = Fraction(-1)
    else:
        cut = max(head.rfind("+", 1), head.rfind("-", 1))
        if cut == -1:
            b = _frac(head)
        else:
            a = _frac(head[:cut])
            btxt = head[cut:]
            b = _frac(btxt) if btxt not in ("+", "-") else Fraction(f"{btxt}1")
    return QuadExt(a, b, d)


def _frac(s: str) -> Fraction:
    if "/" in s:
        p, q = s.split("/", 1)
        return Fraction(int(p), int(q))
    return Fraction(s)


def format_scalar(x: Scalar) -> str:
    if isinstance(x, QuadExt):
        x = x.collapse()
    if isinstance(x, QuadExt):
        if x.a == 0:
            return f"{x.b}*sqrt({x.d})"
        op = "+" if x.b > 0 else "-"
        return f"{x.a}{op}{abs(x.b)}*sqrt({x.d})"
    if isinstance(x, (int, Fraction)):
        return str(x)
    return repr(x)
