"""Relations on an unknown cycle and the solver that intersects them.

Every relation linearizes against the unknown row x = (k, l_1..l_n, m):
pairing against a known reference is linear in x, so each relation
contributes rows (coeffs, rhs).  Tangency-like relations also normalize the
unknown through a demand <x,x> = s with s in {-1, 0, +1} and split into
sign branches for the right-hand side; the demand is the single quadratic
equation left after elimination.

Solutions are found per branch, checked back against every relation on
canonical representatives, deduplicated projectively and returned in a
deterministic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import List, Optional, Sequence, Tuple

from .cycle import Cycle, Metric
from .numerics import (Arithmetic, Scalar, is_exact, scalar_sign, to_float)

Row = Tuple[Tuple[Scalar, ...], Scalar]

MAX_BRANCHES = 64


class BranchOverflow(RuntimeError):
    """More sign branches than the solver is willing to enumerate."""


def _lift(x):
    return Fraction(x) if isinstance(x, int) else x


def row_product(metric: Metric, x: Sequence[Scalar], y: Sequence[Scalar]) -> Scalar:
    """The cycle pairing on raw coefficient rows (k, l.., m)."""
    eta = metric.product_eta
    n = metric.n
    acc = x[n + 1] * y[0] + y[n + 1] * x[0]
    for i in range(n):
        if eta[i] != 0:
            acc = acc + 2 * eta[i] * x[1 + i] * y[1 + i]
    return acc


def pairing_coeffs(metric: Metric, ref: Cycle) -> Tuple[Scalar, ...]:
    """Coefficients c with c . x = <x, ref>."""
    eta = metric.product_eta
    return ((_lift(ref.m),)
            + tuple(_lift(2 * eta[i] * ref.l[i]) for i in range(metric.n))
            + (_lift(ref.k),))


# ---------------------------------------------------------------------------
# relation kinds


class Relation:
    """One constraint on the unknown cycle."""

    flt_invariant = True

    def branch_signs(self, point_mode: bool) -> Tuple[Optional[int], ...]:
        return (None,)

    def build(self, eps: Optional[int], ar: Arithmetic, point_mode: bool):
        """Return (rows, demand) for one sign branch."""
        raise NotImplementedError

    def satisfied_by(self, cycle: Cycle, eps: float) -> bool:
        raise NotImplementedError

    def transform(self, M) -> "Relation":
        return self


def _near0(v: Scalar, eps: float, scale: float = 1.0) -> bool:
    if is_exact(v):
        return v == 0
    return abs(v) <= eps * max(1.0, scale)


def _rowscale(c: Cycle) -> float:
    return max(abs(to_float(v)) for v in c.row()) or 1.0


class IsOrthogonal(Relation):
    def __init__(self, ref: Cycle):
        self.ref = ref

    def build(self, eps, ar, point_mode):
        return [(pairing_coeffs(self.ref.metric, self.ref), 0)], None

    def satisfied_by(self, cycle, eps):
        v = cycle.product(self.ref)
        return _near0(v, eps, _rowscale(cycle) * _rowscale(self.ref))

    def transform(self, M):
        return IsOrthogonal(self.ref.flt(M))

    def __repr__(self):
        return f"IsOrthogonal({self.ref!r})"


class PassesThrough(Relation):
    """Incidence with a point, as orthogonality to its zero-radius cycle."""

    def __init__(self, metric: Metric, point: Sequence[Scalar]):
        self.metric = metric
        self.point = tuple(point)
        self.ref = Cycle.zero_radius_at(metric, self.point)

    def build(self, eps, ar, point_mode):
        return [(pairing_coeffs(self.metric, self.ref), 0)], None

    def satisfied_by(self, cycle, eps):
        v = cycle.product(self.ref)
        return _near0(v, eps, _rowscale(cycle) * _rowscale(self.ref))

    def transform(self, M):
        from .clifford import Infinity, Mv, mobius_apply
        img = mobius_apply(M, Mv.vector(self.metric.product_signature(), self.point))
        if isinstance(img, Infinity):
            return IsOrthogonal(Cycle.infinity(self.metric))
        return PassesThrough(self.metric, img.vector_components())

    def __repr__(self):
        return f"PassesThrough{self.point}"


class IsFlat(Relation):
    """k = 0: the cycle passes through infinity."""

    flt_invariant = False

    def __init__(self, metric: Metric):
        self.metric = metric
        self.ref = Cycle.infinity(metric)

    def build(self, eps, ar, point_mode):
        return [(pairing_coeffs(self.metric, self.ref), 0)], None

    def satisfied_by(self, cycle, eps):
        return _near0(cycle.k, eps, _rowscale(cycle))

    def transform(self, M):
        return IsOrthogonal(self.ref.flt(M))

    def __repr__(self):
        return "IsFlat"


class IsLobachevskyLine(Relation):
    """Geodesic of the upper half-space: orthogonal to the boundary."""

    flt_invariant = False

    def __init__(self, metric: Metric):
        self.metric = metric
        self.ref = Cycle.real_line(metric)

    def build(self, eps, ar, point_mode):
        return [(pairing_coeffs(self.metric, self.ref), 0)], None

    def satisfied_by(self, cycle, eps):
        v = cycle.product(self.ref)
        return _near0(v, eps, _rowscale(cycle))

    def transform(self, M):
        return IsOrthogonal(self.ref.flt(M))

    def __repr__(self):
        return "IsLobachevskyLine"


class IsPoint(Relation):
    """Zero-radius demand <x,x> = 0; turns tangency-like rows into incidence."""

    def __init__(self, metric: Metric):
        self.metric = metric

    def build(self, eps, ar, point_mode):
        return [], 0

    def satisfied_by(self, cycle, eps):
        s = _rowscale(cycle)
        return _near0(cycle.self_product(), eps, s * s)

    def __repr__(self):
        return "IsPoint"


class OnlyReals(Relation):
    """Kept for interface compatibility; rational data satisfies it for free."""

    def __init__(self, metric: Metric):
        self.metric = metric

    def build(self, eps, ar, point_mode):
        return [], None

    def satisfied_by(self, cycle, eps):
        return True

    def __repr__(self):
        return "OnlyReals"


class IsTangent(Relation):
    """|<x,R>| = sqrt(<x,x><R,R>) with both sides normalized by the demand.

    variant: "both", "external" (+1 side of the pairing) or "internal".
    A zero-radius reference degrades to plain incidence, which is noted.
    """

    def __init__(self, ref: Cycle, variant: str = "both"):
        if variant not in ("both", "external", "internal"):
            raise ValueError(f"unknown tangency variant {variant!r}")
        self.ref = ref
        self.variant = variant

    def branch_signs(self, point_mode):
        if point_mode or self.ref.self_product() == 0:
            return (None,)
        return (1, -1)

    def build(self, eps, ar, point_mode):
        coeffs = pairing_coeffs(self.ref.metric, self.ref)
        ss = self.ref.self_product()
        if point_mode or ss == 0:
            return [(coeffs, 0)], None
        rhs = eps * ar.sqrt(ss)
        return [(coeffs, rhs)], scalar_sign(ss)

    def satisfied_by(self, cycle, eps):
        x = cycle.canonical()
        r = self.ref.canonical()
        p, sx, sr = x.product(r), x.self_product(), r.self_product()
        scale = (_rowscale(x) * _rowscale(r)) ** 2
        if not _near0(p * p - sx * sr, eps, scale):
            return False
        if self.variant == "both" or x.k == 0 or r.k == 0 or sx == 0 or sr == 0:
            return True
        want = 1 if self.variant == "external" else -1
        return scalar_sign(p) == want if is_exact(p) else (p > 0) == (want > 0)

    def transform(self, M):
        return IsTangent(self.ref.flt(M), self.variant)

    def __repr__(self):
        return f"IsTangent({self.ref!r}, {self.variant})"


class InversiveDistance(Relation):
    """Pinned normalized pairing <x,R> = theta sqrt|<x,x>| sqrt|<R,R>|."""

    def __init__(self, ref: Cycle, theta: Scalar):
        self.ref = ref
        self.theta = _lift(theta)

    def branch_signs(self, point_mode):
        if point_mode or self.ref.self_product() == 0 or self.theta == 0:
            return (None,)
        return (1, -1)

    def build(self, eps, ar, point_mode):
        coeffs = pairing_coeffs(self.ref.metric, self.ref)
        ss = self.ref.self_product()
        if point_mode or ss == 0:
            return [(coeffs, 0)], None
        if self.theta == 0:
            return [(coeffs, 0)], scalar_sign(ss)
        rhs = eps * self.theta * ar.sqrt(ss)
        return [(coeffs, rhs)], scalar_sign(ss)

    def satisfied_by(self, cycle, eps):
        x = cycle.canonical()
        r = self.ref.canonical()
        p, sx, sr = x.product(r), x.self_product(), r.self_product()
        th = self.theta
        lhs = p * p
        rhs = th * th * abs(sx) * abs(sr)
        scale = (_rowscale(x) * _rowscale(r)) ** 2
        if not _near0(lhs - rhs, eps, scale):
            return False
        if th == 0 or x.k == 0 or r.k == 0:
            return True
        sp = scalar_sign(p) if is_exact(p) else (1 if p > 0 else (-1 if p < 0 else 0))
        return sp == scalar_sign(th) or sp == 0

    def transform(self, M):
        return InversiveDistance(self.ref.flt(M), self.theta)

    def __repr__(self):
        return f"InversiveDistance({self.ref!r}, {self.theta})"


class SteinerPower(Relation):
    """Power d of the unknown against a k-normalized reference:
    d k_x - <x, R_k> = eps sqrt|<R_k,R_k>| with demand <x,x> = -1."""

    flt_invariant = False  # k-normalization is not a Moebius notion

    def __init__(self, ref: Cycle, power: Scalar):
        if ref.k == 0:
            raise ValueError("power against a flat reference is undefined")
        self.ref = ref
        self.power = _lift(power)
        self.ref_k = ref.scaled(1 / _lift(ref.k))

    def branch_signs(self, point_mode):
        if point_mode:
            return (None,)
        return (1, -1)

    def build(self, eps, ar, point_mode):
        metric = self.ref.metric
        base = pairing_coeffs(metric, self.ref_k)
        coeffs = (self.power - base[0],) + tuple(-c for c in base[1:])
        if point_mode:
            return [(coeffs, 0)], None
        rhs = eps * ar.sqrt(self.ref_k.self_product())
        return [(coeffs, rhs)], -1

    def satisfied_by(self, cycle, eps):
        z = cycle.canonical()
        lhs = self.power * z.k - z.product(self.ref_k)
        rhs_sq = z.self_product() * self.ref_k.self_product()
        scale = (_rowscale(z) * _rowscale(self.ref_k)) ** 2
        if not _near0(lhs * lhs - rhs_sq, eps, scale):
            return False
        if z.k == 0:
            return True
        if is_exact(lhs):
            return scalar_sign(lhs) >= 0
        return lhs >= -eps * max(1.0, scale)

    def __repr__(self):
        return f"SteinerPower({self.ref!r}, {self.power})"


# ---------------------------------------------------------------------------
# linear stage

EPS_RANK = 1e-10


def linear_solve(rows: List[Row], nunk: int, exact: bool):
    """Gauss-Jordan over the scalar field.

    Returns (particular, basis) or (None, None) when inconsistent.  Exact
    rows pivot on the first nonzero entry; float rows partial-pivot and
    rank-test against EPS_RANK times the original row magnitude.
    """
    A = [[_lift(c) for c in coeffs] + [_lift(rhs)] for coeffs, rhs in rows]
    if not exact:
        A = [[to_float(c) for c in row] for row in A]
    norms = [max((abs(to_float(c)) for c in row), default=0.0) or 1.0 for row in A]
    pivots: List[Tuple[int, int]] = []
    rank = 0
    for col in range(nunk):
        pr = None
        if exact:
            for i in range(rank, len(A)):
                if A[i][col] != 0:
                    pr = i
                    break
        else:
            best = 0.0
            for i in range(rank, len(A)):
                mag = abs(A[i][col])
                if mag > best and mag > EPS_RANK * norms[i]:
                    best, pr = mag, i
        if pr is None:
            continue
        A[rank], A[pr] = A[pr], A[rank]
        norms[rank], norms[pr] = norms[pr], norms[rank]
        piv = A[rank][col]
        A[rank] = [c / piv for c in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        pivots.append((rank, col))
        rank += 1
    for i in range(rank, len(A)):
        resid = A[i][nunk]
        ok = resid == 0 if exact else abs(resid) <= EPS_RANK * norms[i]
        if not ok:
            return None, None
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    particular = [zero] * nunk
    for r, col in pivots:
        particular[col] = A[r][nunk]
    pivot_cols = {col for _, col in pivots}
    basis = []
    for free in range(nunk):
        if free in pivot_cols:
            continue
        v = [zero] * nunk
        v[free] = one
        for r, col in pivots:
            v[col] = -A[r][free]
        basis.append(tuple(v))
    return tuple(particular), basis


# ---------------------------------------------------------------------------
# solution container


@dataclass
class SolutionSet:
    status: str                      # "finite" | "parametric" | "infeasible"
    cycles: List[Cycle] = field(default_factory=list)
    provenance: List[tuple] = field(default_factory=list)
    base: Optional[Cycle] = None
    span: List[Cycle] = field(default_factory=list)
    residual_demand: Optional[int] = None
    reason: str = ""
    demoted: bool = False
    notes: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    @property
    def projective_dim(self) -> int:
        if self.status != "parametric":
            return 0
        extra = 1 if self.base is not None and any(
            c != 0 for c in self.base.row()) else 0
        return len(self.span) - 1 + extra


# ---------------------------------------------------------------------------
# branch machinery


def _is_zero_scalar(v, exact, eps=1e-12, scale=1.0):
    return v == 0 if exact else abs(v) <= eps * max(1.0, scale)


def _quad_roots(a, b, c, ar: Arithmetic):
    """Roots of a t^2 + 2 b t + c = 0; None = identically satisfied."""
    exact = ar.exact and all(is_exact(v) for v in (a, b, c))
    if not exact:
        a, b, c = to_float(a), to_float(b), to_float(c)
        scale = max(abs(a), abs(b), abs(c), 1.0)
        if abs(a) <= 1e-13 * scale:
            if abs(b) <= 1e-13 * scale:
                return [] if abs(c) > 1e-10 * scale else None
            return [-c / (2 * b)]
        disc = b * b - a * c
        # a discriminant at rounding-noise level is a double root, not a
        # pair of spuriously split solutions
        dscale = max(b * b, abs(a * c), 1e-300)
        if disc <= 1e-12 * dscale:
            return [-b / a] if disc >= -1e-10 * dscale else []
        r = disc ** 0.5
        return sorted({(-b - r) / a, (-b + r) / a})
    if a == 0:
        if b == 0:
            return [] if c != 0 else None
        return [-c / (2 * b)]
    disc = b * b - a * c
    sgn = scalar_sign(disc)
    if sgn < 0:
        return []
    if sgn == 0:
        return [-b / a]
    root = ar.sqrt(disc)
    if ar.demoted:
        a, b = to_float(a), to_float(b)
        return sorted({(-b - root) / a, (-b + root) / a})
    return [(-b - root) / a, (-b + root) / a]


def _combine(p, v, t):
    return tuple(pc + t * vc for pc, vc in zip(p, v))


def _solve_branch(metric, rows, demand, ar: Arithmetic):
    """One sign branch: linear stage plus at most one quadratic demand.

    Returns (list of rows | None, parametric tuple | None).
    """
    exact = ar.exact
    if not exact:
        rows = [(tuple(to_float(c) for c in coeffs), to_float(rhs))
                for coeffs, rhs in rows]
    nunk = metric.n + 2
    p, basis = linear_solve(rows, nunk, exact)
    if p is None:
        return [], None
    dim = len(basis)
    homogeneous = all(_is_zero_scalar(c, exact) for c in p)
    Q = lambda x, y: row_product(metric, x, y)

    if demand is None:
        if dim == 0:
            return [], None          # only the trivial row
        if dim == 1:
            return [basis[0]], None
        return None, (None, basis, None)

    if homogeneous:
        if dim == 0:
            return [], None
        if demand == 0:
            if dim == 1:
                ok = _is_zero_scalar(Q(basis[0], basis[0]), exact, eps=1e-9,
                                     scale=_norm2(basis[0]))
                return ([basis[0]] if ok else []), None
            if dim == 2:
                sols = _binary_quadratic(Q, basis[0], basis[1], ar)
                if sols is None:
                    return None, (None, basis, None)  # whole line isotropic
                return sols, None
            return None, (None, basis, 0)
        # <x,x> = s != 0 fixes the scale along the line
        if dim == 1:
            qv = Q(basis[0], basis[0])
            if _is_zero_scalar(qv, exact, scale=_norm2(basis[0])):
                return [], None
            t2 = Fraction(demand, qv) if isinstance(qv, int) else demand / qv
            neg = (scalar_sign(t2) < 0) if is_exact(t2) else (t2 < 0)
            if neg:
                return [], None
            t = ar.sqrt(t2)
            return [tuple(t * c for c in basis[0])], None
        return None, (None, basis, demand)

    if dim == 0:
        ok = _is_zero_scalar(Q(p, p) - demand, exact, eps=1e-9, scale=_norm2(p))
        return ([p] if ok else []), None
    if dim == 1:
        v = basis[0]
        roots = _quad_roots(Q(v, v), Q(p, v), Q(p, p) - demand, ar)
        if roots is None:
            return None, ((p,), basis, None)  # demand holds along the line
        if ar.demoted and is_exact(p[0]):
            p = tuple(to_float(c) for c in p)
            v = tuple(to_float(c) for c in v)
        return [_combine(p, v, t) for t in roots], None
    return None, ((p,), basis, demand)


def _norm2(row) -> float:
    s = max(abs(to_float(c)) for c in row) or 1.0
    return s * s


def _binary_quadratic(Q, v1, v2, ar: Arithmetic):
    """Projective roots of Q(t v1 + u v2) = 0."""
    a, b, c = Q(v1, v1), Q(v1, v2), Q(v2, v2)
    exact = ar.exact and all(is_exact(x) for x in (a, b, c))
    scale = max(_norm2(v1), _norm2(v2))
    if all(_is_zero_scalar(x, exact, scale=scale) for x in (a, b, c)):
        return None  # the whole line is isotropic; caller reports parametric
    sols = []
    if not _is_zero_scalar(a, exact, scale=scale):
        roots = _quad_roots(a, b, c, ar)
        if roots is None:
            a, b, c = to_float(a), to_float(b), to_float(c)
            v1 = tuple(to_float(x) for x in v1)
            v2 = tuple(to_float(x) for x in v2)
            roots = _quad_roots(a, b, c, ar) or []
        for t in roots:
            sols.append(_combine(v2, v1, t))
    else:
        sols.append(v1)
        if not _is_zero_scalar(b, exact, scale=scale):
            sols.append(tuple(c * x - 2 * b * y for x, y in zip(v1, v2)))
    return sols


# ---------------------------------------------------------------------------
# driver


def solve(relations: Sequence[Relation], metric: Metric,
          arithmetic="exact", eps: Optional[float] = None) -> SolutionSet:
    """Intersect all relations; enumerate sign branches; verify; order."""
    from .numerics import comparison_eps
    base_ar = arithmetic if isinstance(arithmetic, Arithmetic) else Arithmetic(arithmetic)
    eps = comparison_eps() if eps is None else eps

    point_mode = any(isinstance(r, IsPoint) for r in relations)
    sign_axes = [r.branch_signs(point_mode) for r in relations]
    count = 1
    for axis in sign_axes:
        count *= len(axis)
        if count > MAX_BRANCHES:
            raise BranchOverflow(f"{count}+ sign branches (cap {MAX_BRANCHES})")

    found: List[Tuple[Cycle, tuple]] = []
    parametric = None
    notes: List[str] = []
    demoted = False
    infeasible_reasons: List[str] = []

    for pattern in iproduct(*sign_axes):
        ar = base_ar.clone()
        rows: List[Row] = []
        demands = []
        for rel, epsilon in zip(relations, pattern):
            r_rows, r_demand = rel.build(epsilon, ar, point_mode)
            rows.extend(r_rows)
            if r_demand is not None:
                demands.append(r_demand)
        if demands and any(d != demands[0] for d in demands):
            infeasible_reasons.append(
                f"branch {pattern}: conflicting demands {sorted(set(demands))}")
            continue
        demand = demands[0] if demands else None
        sols, par = _solve_branch(metric, rows, demand, ar)
        if ar.demoted:
            demoted = True
            notes.extend(ar.notes)
        if par is not None and parametric is None:
            pbase, pbasis, ps = par
            parametric = (
                Cycle.from_row(metric, pbase[0]) if pbase else None,
                [Cycle.from_row(metric, b) for b in pbasis],
                ps,
            )
        for idx, srow in enumerate(sols or []):
            found.append((Cycle.from_row(metric, srow), (pattern, idx)))

    # verify every candidate against every relation, then dedup and order
    kept = {}
    for cyc, prov in found:
        can = cyc.canonical()
        if all(rel.satisfied_by(can, eps) for rel in relations):
            key = can.key()
            if key not in kept:
                kept[key] = (can, prov)
    ordered = sorted(kept.values(), key=lambda cp: _sort_key(cp[0]))

    if ordered:
        return SolutionSet("finite", [c for c, _ in ordered],
                           [p for _, p in ordered], demoted=demoted, notes=notes)
    if parametric is not None:
        base, span, resid = parametric
        note = notes + (["residual quadratic demand left unsolved"]
                        if resid is not None else [])
        return SolutionSet("parametric", base=base, span=span,
                           residual_demand=resid, demoted=demoted, notes=note)
    reason = "; ".join(infeasible_reasons) or "no cycle satisfies the relations"
    return SolutionSet("infeasible", reason=reason, demoted=demoted, notes=notes)


def _sort_key(c: Cycle):
    primary = tuple(round(to_float(v), 9) + 0 for v in c.row())
    return primary, tuple(repr(v) for v in c.row())


def check(relations: Sequence[Relation], cycle: Cycle,
          eps: Optional[float] = None) -> bool:
    """Do the relations hold for this concrete cycle?"""
    from .numerics import comparison_eps
    eps = comparison_eps() if eps is None else eps
    can = cycle.canonical()
    return all(rel.satisfied_by(can, eps) for rel in relations)
