"""Feasible sets Pi, membership of n-types, and enumeration of Pi_n."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import NType, Pmf, is_exact_number, to_fraction
from .errors import AlphabetMismatch, BudgetExceeded, ExactUnavailable, ValidationError
from .kernels import count_compositions, enumerate_feasible

DEFAULT_BUDGET = 10 ** 8
INT64_SAFE = 2 ** 62


# ---------------------------------------------------------------------------
# membership modes

@dataclass(frozen=True)
class Exact:
    """Residual must vanish under rational arithmetic."""

    def __str__(self):
        return "exact"


@dataclass(frozen=True)
class Tolerance:
    """Absolute residual at most ``tau``."""

    tau: float = 1e-4

    def __post_init__(self):
        if not (self.tau >= 0):
            raise ValidationError("tolerance must be nonnegative")

    def __str__(self):
        return f"tol({self.tau:g})"


EXACT = Exact()
MembershipMode = Exact | Tolerance


# ---------------------------------------------------------------------------
# constraint sets
#
# Each single-constraint set is a list of separable rows
#     residual_r(p) = sum_i f_r(i, p_i) - target_r
# which the enumeration kernel consumes as lookup tables over counts.

def _is_exact_seq(xs) -> bool:
    return all(is_exact_number(x) for x in xs)


class ConstraintSet:
    """Base class; subclasses are frozen dataclasses and hence hashable."""

    m: int | None = None
    symmetric = False

    def residual(self, p):
        """Max absolute row residual (min over members for unions)."""
        exact = isinstance(p, Pmf) and p.exact or isinstance(p, NType)
        if exact:
            try:
                vals = self._exact_residuals(_fractions_of(p))
                return max((abs(v) for v in vals), default=Fraction(0))
            except ExactUnavailable:
                pass
        arr = _array_of(p)
        self._check_m(len(arr))
        vals = self._float_residuals(arr)
        return max((abs(v) for v in vals), default=0.0)

    def contains(self, nu: NType, mode: MembershipMode = EXACT) -> bool:
        self._check_m(nu.m)
        if isinstance(mode, Exact):
            vals = self._exact_residuals(nu.fractions())
            return all(v == 0 for v in vals)
        return all(abs(v) <= mode.tau for v in self._float_residuals(nu.array))

    def _check_m(self, m):
        if self.m is not None and m != self.m:
            raise AlphabetMismatch(f"set is defined on {self.m} symbols, got {m}")

    # row encodings -------------------------------------------------------
    def rows_float(self, m, n):
        """List of ``(table (m, n+1) float, target)``."""
        raise NotImplementedError

    def rows_exact(self, m, n):
        """List of ``(table (m, n+1) int, target int)``, equality = feasible."""
        raise NotImplementedError

    def _float_residuals(self, p: np.ndarray):
        raise NotImplementedError

    def _exact_residuals(self, p: tuple):
        raise NotImplementedError

    def symmetry_ok(self, perm) -> bool:
        """Whether permuting coordinates by ``perm`` maps the set onto itself."""
        return self.symmetric


def _integer_exponent(alpha) -> int:
    alpha = to_fraction(alpha)
    if alpha.denominator != 1:
        raise ExactUnavailable("exact membership needs an integer exponent")
    return int(alpha)


def _fractions_of(p):
    if isinstance(p, NType):
        return p.fractions()
    return tuple(p.probs)


def _array_of(p):
    if isinstance(p, NType):
        return p.array
    if isinstance(p, Pmf):
        return p.array
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class FullSimplex(ConstraintSet):
    m: int | None = None
    symmetric = True

    def rows_float(self, m, n):
        return []

    def rows_exact(self, m, n):
        return []

    def _float_residuals(self, p):
        return []

    def _exact_residuals(self, p):
        return []


@dataclass(frozen=True)
class Moment(ConstraintSet):
    """sum_i p_i u_i = a."""

    u: tuple
    a: object

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        if len(self.u) < 2:
            raise ValidationError("moment vector needs at least two entries")

    @property
    def m(self):
        return len(self.u)

    def symmetry_ok(self, perm):
        return _moment_key(self.u, self.a, perm) == _moment_key(self.u, self.a)

    def rows_float(self, m, n):
        self._check_m(m)
        k = np.arange(n + 1) / n
        table = np.array([float(ui) * k for ui in self.u])
        return [(table, float(self.a))]

    def rows_exact(self, m, n):
        self._check_m(m)
        u = [to_fraction(x) for x in self.u]
        a = to_fraction(self.a)
        d = math.lcm(*(x.denominator for x in u + [a]))
        k = np.arange(n + 1, dtype=object)
        table = np.array([[int(x * d) * kk for kk in k] for x in u], dtype=object)
        return [(table, int(a * d) * n)]

    def _float_residuals(self, p):
        return [float(np.dot(p, np.array(self.u, dtype=float))) - float(self.a)]

    def _exact_residuals(self, p):
        return [sum(pi * to_fraction(ui) for pi, ui in zip(p, self.u)) - to_fraction(self.a)]


@dataclass(frozen=True)
class Frequency(ConstraintSet):
    """sum_i p_i^alpha = a."""

    alpha: object
    a: object
    m: int | None = None
    symmetric = True

    def __post_init__(self):
        if not float(self.alpha) > 0:
            raise ValidationError("frequency exponent must be positive")

    def _int_alpha(self):
        return _integer_exponent(self.alpha)

    def rows_float(self, m, n):
        self._check_m(m)
        alpha = float(self.alpha)
        k = (np.arange(n + 1) / n) ** alpha
        return [(np.tile(k, (m, 1)), float(self.a))]

    def rows_exact(self, m, n):
        self._check_m(m)
        alpha = self._int_alpha()
        a = to_fraction(self.a)
        row = np.array([a.denominator * kk ** alpha for kk in range(n + 1)], dtype=object)
        return [(np.tile(row, (m, 1)), a.numerator * n ** alpha)]

    def _float_residuals(self, p):
        return [float(np.sum(np.asarray(p) ** float(self.alpha))) - float(self.a)]

    def _exact_residuals(self, p):
        alpha = self._int_alpha()
        return [sum(pi ** alpha for pi in p) - to_fraction(self.a)]


@dataclass(frozen=True)
class GeneralizedFrequency(ConstraintSet):
    """sum_i p_i^alpha (x_i - b) = 0."""

    alpha: object
    b: object
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        if not float(self.alpha) > 0:
            raise ValidationError("frequency exponent must be positive")

    @property
    def m(self):
        return len(self.x)

    def symmetry_ok(self, perm):
        return all(self.x[perm[i]] == self.x[i] for i in range(self.m))

    def _exact_parts(self):
        alpha = _integer_exponent(self.alpha)
        c = [to_fraction(xi) - to_fraction(self.b) for xi in self.x]
        return alpha, c

    def rows_float(self, m, n):
        self._check_m(m)
        k = (np.arange(n + 1) / n) ** float(self.alpha)
        c = np.array(self.x, dtype=float) - float(self.b)
        return [(c[:, None] * k[None, :], 0.0)]

    def rows_exact(self, m, n):
        self._check_m(m)
        alpha, c = self._exact_parts()
        d = math.lcm(*(ci.denominator for ci in c))
        table = np.array([[int(ci * d) * kk ** alpha for kk in range(n + 1)] for ci in c], dtype=object)
        return [(table, 0)]

    def _float_residuals(self, p):
        c = np.array(self.x, dtype=float) - float(self.b)
        return [float(np.sum(np.asarray(p) ** float(self.alpha) * c))]

    def _exact_residuals(self, p):
        alpha, c = self._exact_parts()
        return [sum(pi ** alpha * ci for pi, ci in zip(p, c))]


@dataclass(frozen=True)
class Line(ConstraintSet):
    """One-parameter set {base + t * direction} intersected with the simplex.

    ``direction`` must sum to zero and ``base`` to one.  Membership uses the
    residuals against unit normals of the line within the simplex plane.
    """

    base: tuple
    direction: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "direction", tuple(self.direction))
        if len(self.base) != len(self.direction) or len(self.base) < 2:
            raise ValidationError("base and direction must have equal length >= 2")
        if abs(sum(float(v) for v in self.direction)) > 1e-12:
            raise ValidationError("line direction must sum to zero")
        if abs(sum(float(v) for v in self.base) - 1) > 1e-12:
            raise ValidationError("line base must sum to one")
        if all(float(v) == 0 for v in self.direction):
            raise ValidationError("line direction must be nonzero")

    @property
    def m(self):
        return len(self.base)

    def point(self, t) -> np.ndarray:
        return np.array(self.base, dtype=float) + t * np.array(self.direction, dtype=float)

    def parameter_range(self):
        """Interval of t for which the point lies in the closed simplex."""
        b = np.array(self.base, dtype=float)
        d = np.array(self.direction, dtype=float)
        lo, hi = -math.inf, math.inf
        for bi, di in zip(b, d):
            if di > 0:
                lo = max(lo, -bi / di)
            elif di < 0:
                hi = min(hi, -bi / di)
            elif bi < 0:
                return math.nan, math.nan
        return lo, hi

    def normals(self) -> np.ndarray:
        """Orthonormal basis of the complement of span{direction, ones}."""
        m = self.m
        d = np.array(self.direction, dtype=float)
        basis = np.vstack([np.ones(m) / math.sqrt(m), d / np.linalg.norm(d)])
        _, _, vt = np.linalg.svd(basis, full_matrices=True)
        return vt[2:]

    def rows_float(self, m, n):
        self._check_m(m)
        k = np.arange(n + 1) / n
        b = np.array(self.base, dtype=float)
        return [(w[:, None] * k[None, :], float(w @ b)) for w in self.normals()]

    def rows_exact(self, m, n):
        self._check_m(m)
        if m != 3 or not _is_exact_seq(self.base + self.direction):
            raise ExactUnavailable("exact line membership needs rational data on 3 symbols")
        w = self._exact_normal()
        d = math.lcm(*(x.denominator for x in w))
        wi = [int(x * d) for x in w]
        target = sum(x * to_fraction(b) for x, b in zip(wi, self.base)) * n
        if target.denominator != 1:
            return [(np.zeros((m, n + 1), dtype=object), 1)]  # no integer solution
        table = np.array([[x * kk for kk in range(n + 1)] for x in wi], dtype=object)
        return [(table, int(target))]

    def _exact_normal(self):
        d = [to_fraction(v) for v in self.direction]
        # cross(d, ones) is orthogonal to both
        return [d[1] - d[2], d[2] - d[0], d[0] - d[1]]

    def _float_residuals(self, p):
        b = np.array(self.base, dtype=float)
        return [float(w @ (np.asarray(p) - b)) for w in self.normals()]

    def _exact_residuals(self, p):
        if self.m != 3 or not _is_exact_seq(self.base + self.direction):
            raise ExactUnavailable("exact line membership needs rational data on 3 symbols")
        w = self._exact_normal()
        return [sum(wi * (pi - to_fraction(bi)) for wi, pi, bi in zip(w, p, self.base))]


@dataclass(frozen=True)
class PointSet(ConstraintSet):
    """A finite set of rational pmfs, each given as an n0-type.

    Pi_n is nonempty only when n is a multiple of an anchor's size.
    """

    points: tuple

    def __post_init__(self):
        pts = tuple(p if isinstance(p, NType) else NType(tuple(p)) for p in self.points)
        if not pts:
            raise ValidationError("point set is empty")
        if len({p.m for p in pts}) != 1:
            raise AlphabetMismatch("points have different lengths")
        object.__setattr__(self, "points", pts)

    @property
    def m(self):
        return self.points[0].m

    def pmfs(self):
        return [p.as_pmf() for p in self.points]

    def symmetry_ok(self, perm):
        fr = {p.fractions() for p in self.points}
        return all(tuple(f[i] for i in perm) in fr for f in fr)

    def types_at(self, n):
        out = set()
        for p in self.points:
            if n % p.n == 0:
                out.add(p.scaled(n // p.n))
        return sorted(out)

    def _exact_residuals(self, p):
        p = tuple(p)
        # distance-like residual: zero iff p is one of the points
        return [min(max(abs(a - b) for a, b in zip(p, q.fractions())) for q in self.points)]

    def _float_residuals(self, p):
        p = np.asarray(p, dtype=float)
        return [min(float(np.max(np.abs(p - q.array))) for q in self.points)]


@dataclass(frozen=True)
class Union(ConstraintSet):
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValidationError("union needs at least one member")
        ms = {s.m for s in members if s.m is not None}
        if len(ms) > 1:
            raise AlphabetMismatch("union members live on different alphabets")
        object.__setattr__(self, "members", members)

    @property
    def m(self):
        ms = [s.m for s in self.members if s.m is not None]
        return ms[0] if ms else None

    def residual(self, p):
        return min(s.residual(p) for s in self.members)

    def contains(self, nu, mode=EXACT):
        return any(s.contains(nu, mode) for s in self.members)

    def symmetry_ok(self, perm):
        # a union is symmetric if perm maps the member family onto itself
        return all(any(_same_after(s, t, perm) for t in self.members) for s in self.members)


def _moment_key(u, a, perm=None):
    """Canonical form of {p: sum p_i u_perm(i) = a}: u - a scaled so its
    first nonzero entry is 1 (the set only depends on that direction)."""
    try:
        v = [to_fraction(x) - to_fraction(a) for x in u]
    except ExactUnavailable:
        v = [float(x) - float(a) for x in u]
    if perm is not None:
        v = [v[perm[i]] for i in range(len(v))]
    lead = next((x for x in v if x != 0), None)
    return tuple(v) if lead is None else tuple(x / lead for x in v)


def _same_after(s, t, perm):
    if isinstance(s, Moment) and isinstance(t, Moment):
        return _moment_key(s.u, s.a, perm) == _moment_key(t.u, t.a)
    return s == t and s.symmetry_ok(perm)


# ---------------------------------------------------------------------------
# pairs of types

@dataclass(frozen=True)
class PairConstraintSet:
    """sum_i nu1_i x_i + sum_j nu2_j y_j = a, each component on its simplex."""

    x: tuple
    y: tuple
    a: object

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(self.y))
        if len(self.x) < 2 or len(self.y) < 2:
            raise ValidationError("each alphabet needs at least two symbols")

    @property
    def exact_ok(self):
        return all(isinstance(v, (int, float, str, Fraction)) for v in self.x + self.y + (self.a,))

    def residual(self, p1, p2):
        r = float(np.dot(_array_of(p1), np.array(self.x, float)) + np.dot(_array_of(p2), np.array(self.y, float)))
        return abs(r - float(self.a))

    def contains(self, nu1: NType, nu2: NType, mode: MembershipMode = EXACT) -> bool:
        if nu1.n != nu2.n:
            raise ValidationError("pair components must share n")
        if isinstance(mode, Exact):
            if not self.exact_ok:
                raise ExactUnavailable("pair constraint is not rational")
            s = sum(f * to_fraction(v) for f, v in zip(nu1.fractions(), self.x))
            s += sum(f * to_fraction(v) for f, v in zip(nu2.fractions(), self.y))
            return s == to_fraction(self.a)
        return self.residual(nu1, nu2) <= mode.tau

    @property
    def range(self):
        return min(map(float, self.x)) + min(map(float, self.y)), max(map(float, self.x)) + max(map(float, self.y))


# ---------------------------------------------------------------------------
# enumeration

def _check_budget(n, m, budget):
    budget = DEFAULT_BUDGET if budget is None else budget
    size = count_compositions(n, m)
    if size > budget:
        raise BudgetExceeded(f"C({n}+{m}-1, {m}-1) = {size} candidates exceeds budget {budget}")


def _stack_rows(rows, m, n, exact):
    if not rows:
        dtype = np.int64 if exact else float
        return np.zeros((0, m, n + 1), dtype=dtype), np.zeros(0, dtype=dtype)
    tables = np.stack([t for t, _ in rows])
    targets = [tg for _, tg in rows]
    if exact:
        bound = max(int(np.max(np.abs(tables))) * m, max(abs(int(t)) for t in targets))
        if bound < INT64_SAFE:
            return tables.astype(np.int64), np.array(targets, dtype=np.int64)
        return tables.astype(object), np.array(targets, dtype=object)
    return tables.astype(float), np.array(targets, dtype=float)


def _enumerate_single(n, m, s, mode, use_numba):
    if isinstance(s, PointSet):
        return [t.counts for t in s.types_at(n)]
    exact = isinstance(mode, Exact)
    rows = s.rows_exact(m, n) if exact else s.rows_float(m, n)
    tables, targets = _stack_rows(rows, m, n, exact)
    if exact:
        tol = np.zeros(len(targets), dtype=tables.dtype)
    else:
        tol = np.full(len(targets), float(mode.tau))
    found = enumerate_feasible(tables, targets, tol, n, use_numba=use_numba)
    return [tuple(r) for r in found.tolist()]


def enumerate_types(n: int, constraint: ConstraintSet, mode: MembershipMode = EXACT, m: int | None = None,
                    budget: int | None = None, use_numba=None) -> list[NType]:
    """All n-types in Pi_n, lexicographically ordered by counts."""
    if n < 1:
        raise ValidationError("n must be positive")
    m = constraint.m if constraint.m is not None else m
    if m is None:
        raise ValidationError("alphabet size unknown; pass m")
    if constraint.m is not None and m != constraint.m:
        raise AlphabetMismatch(f"set is defined on {constraint.m} symbols, got m={m}")
    _check_budget(n, m, budget)
    members = constraint.members if isinstance(constraint, Union) else (constraint,)
    found = set()
    for s in members:
        found.update(_enumerate_single(n, m, s, mode, use_numba))
    return [NType(c) for c in sorted(found)]


def enumerate_pair_types(n: int, pair_set: PairConstraintSet, mode: MembershipMode = EXACT,
                         budget: int | None = None, use_numba=None):
    """All feasible pairs (nu1, nu2) of n-types, ordered by (nu1, nu2).

    Components are enumerated separately and matched on their moment sums,
    so the n1 x n2 product space is never materialized.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    m1, m2 = len(pair_set.x), len(pair_set.y)
    size = count_compositions(n, m1) + count_compositions(n, m2)
    if size > budget:
        raise BudgetExceeded(f"{size} component candidates exceeds budget {budget}")
    t1 = enumerate_feasible(np.zeros((0, m1, n + 1)), [], [], n, use_numba=use_numba)
    t2 = enumerate_feasible(np.zeros((0, m2, n + 1)), [], [], n, use_numba=use_numba)
    pairs = []
    if isinstance(mode, Exact):
        if not pair_set.exact_ok:
            raise ExactUnavailable("pair constraint is not rational")
        x = [to_fraction(v) for v in pair_set.x]
        y = [to_fraction(v) for v in pair_set.y]
        a = to_fraction(pair_set.a)
        d = math.lcm(*(v.denominator for v in x + y + [a]))
        xi = np.array([int(v * d) for v in x], dtype=object)
        yi = np.array([int(v * d) for v in y], dtype=object)
        target = int(a * d) * n
        s1 = (t1.astype(object) @ xi).tolist()
        s2 = (t2.astype(object) @ yi).tolist()
        by_sum = {}
        for j, s in enumerate(s2):
            by_sum.setdefault(s, []).append(j)
        for i, s in enumerate(s1):
            for j in by_sum.get(target - s, ()):
                pairs.append((i, j))
    else:
        tau = float(mode.tau)
        s1 = t1 @ np.array(pair_set.x, dtype=float) / n
        s2 = t2 @ np.array(pair_set.y, dtype=float) / n
        order = np.argsort(s2, kind="stable")
        sorted_s2 = s2[order]
        a = float(pair_set.a)
        for i, s in enumerate(s1):
            lo = np.searchsorted(sorted_s2, a - s - tau - 1e-12, side="left")
            hi = np.searchsorted(sorted_s2, a - s + tau + 1e-12, side="right")
            for j in sorted(order[lo:hi].tolist()):
                if abs(s + s2[j] - a) <= tau:
                    pairs.append((i, j))
            if len(pairs) > budget:
                raise BudgetExceeded("feasible pair count exceeds budget")
    used1 = sorted({i for i, _ in pairs})
    used2 = sorted({j for _, j in pairs})
    n1 = {i: NType(tuple(t1[i].tolist())) for i in used1}
    n2 = {j: NType(tuple(t2[j].tolist())) for j in used2}
    return [(n1[i], n2[j]) for i, j in pairs]


def residual(p, constraint: ConstraintSet):
    return constraint.residual(p)


def contains(nu: NType, constraint: ConstraintSet, mode: MembershipMode = EXACT) -> bool:
    return constraint.contains(nu, mode)
