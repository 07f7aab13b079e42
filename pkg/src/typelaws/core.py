"""Alphabets, pmfs, n-types and the exact/log-space combinatorial primitives."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import (
    DomainTooSmall,
    ExactUnavailable,
    MismatchedTypes,
    ValidationError,
)

#: exact big-rational weights are only produced up to this sample size
EXACT_CAP = 400

#: the factorial bound (n/e)^n < n! < n (n/e)^n used by the bracket formulas
MIN_BOUND_N = 7


def to_fraction(x) -> Fraction:
    """Convert ``x`` to an exact rational.

    Floats are read through their shortest decimal representation, so the
    literal ``0.42`` becomes ``21/50`` rather than its binary expansion.
    Strings may be decimals or ``"p/q"``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise ValidationError(f"not a number: {x!r}")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational {x!r}") from exc
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ExactUnavailable(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    raise ValidationError(f"not a number: {x!r}")


def is_exact_number(x) -> bool:
    return isinstance(x, (Fraction, int, np.integer, str)) and not isinstance(x, bool)


def log_fraction(x: Fraction) -> float:
    """Natural log of a nonnegative rational of any size."""
    if x < 0:
        raise ValueError("log of negative number")
    if x == 0:
        return -math.inf
    return math.log(x.numerator) - math.log(x.denominator)


# ---------------------------------------------------------------------------
# data model

@dataclass(frozen=True)
class Alphabet:
    symbols: tuple
    values: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) < 2:
            raise ValidationError("an alphabet needs at least two symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError("alphabet symbols must be distinct")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(self.values))
            if len(self.values) != len(self.symbols):
                raise ValidationError("alphabet values must have one entry per symbol")

    @property
    def m(self) -> int:
        return len(self.symbols)

    @classmethod
    def from_values(cls, values):
        values = tuple(values)
        return cls(symbols=tuple(str(v) for v in values), values=values)

    def index(self, symbol) -> int:
        return self.symbols.index(symbol)


@dataclass(frozen=True)
class Pmf:
    """Probability vector on a finite alphabet.

    ``exact`` pmfs hold :class:`~fractions.Fraction` entries summing to exactly
    one; float pmfs hold Python floats summing to one within 1e-12.
    """

    probs: tuple
    exact: bool = False

    def __post_init__(self):
        probs = tuple(self.probs)
        if len(probs) < 2:
            raise ValidationError("a pmf needs at least two entries")
        if self.exact:
            probs = tuple(to_fraction(p) for p in probs)
            if any(p < 0 for p in probs):
                raise ValidationError("pmf entries must be nonnegative")
            if sum(probs) != 1:
                raise ValidationError(f"exact pmf sums to {sum(probs)}, not 1")
        else:
            probs = tuple(float(p) for p in probs)
            if any(not math.isfinite(p) or p < 0 for p in probs):
                raise ValidationError("pmf entries must be finite and nonnegative")
            if abs(math.fsum(probs) - 1.0) > 1e-12:
                raise ValidationError(f"pmf sums to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def of(cls, probs):
        """Exact when every entry is an int/Fraction/str, float otherwise."""
        probs = tuple(probs)
        if all(is_exact_number(p) for p in probs):
            return cls(probs, exact=True)
        return cls(probs, exact=False)

    @classmethod
    def uniform(cls, m: int):
        return cls(tuple(Fraction(1, m) for _ in range(m)), exact=True)

    @property
    def m(self) -> int:
        return len(self.probs)

    @property
    def array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    @property
    def is_source(self) -> bool:
        return all(p > 0 for p in self.probs)

    def require_source(self):
        if not self.is_source:
            raise ValidationError("a source pmf must be strictly positive")
        return self

    def permuted(self, perm) -> "Pmf":
        return Pmf(tuple(self.probs[i] for i in perm), exact=self.exact)

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True, order=True)
class NType:
    """An n-type: occurrence counts of each symbol in a length-n sequence."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 2:
            raise ValidationError("a type needs at least two coordinates")
        if any(c < 0 for c in counts):
            raise ValidationError("counts must be nonnegative")
        if sum(counts) <= 0:
            raise ValidationError("n must be positive")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    def fractions(self) -> tuple:
        n = self.n
        return tuple(Fraction(c, n) for c in self.counts)

    def as_pmf(self) -> Pmf:
        return Pmf(self.fractions(), exact=True)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n

    def scaled(self, k: int) -> "NType":
        return NType(tuple(k * c for c in self.counts))

    def permuted(self, perm) -> "NType":
        return NType(tuple(self.counts[i] for i in perm))

    def __str__(self):
        return "[" + " ".join(str(c) for c in self.counts) + "]"


@dataclass(frozen=True)
class Weight:
    """A nonnegative quantity carried as an exact rational and/or its natural log."""

    log: float
    exact: Fraction | None = field(default=None)

    @classmethod
    def from_exact(cls, value) -> "Weight":
        value = to_fraction(value)
        if value < 0:
            raise ValidationError("weights are nonnegative")
        return cls(log=log_fraction(value), exact=value)

    @classmethod
    def from_log(cls, log: float) -> "Weight":
        return cls(log=float(log), exact=None)

    @property
    def value(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log)

    def __mul__(self, other: "Weight") -> "Weight":
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
        return Weight(log=self.log + other.log, exact=exact)

    def __truediv__(self, other: "Weight") -> "Weight":
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact / other.exact
        return Weight(log=self.log - other.log, exact=exact)

    def consistent(self, rel=1e-10) -> bool:
        if self.exact is None:
            return True
        ref = log_fraction(self.exact)
        if math.isinf(ref) or math.isinf(self.log):
            return ref == self.log
        return abs(self.log - ref) <= rel * max(1.0, abs(ref))

    def __lt__(self, other: "Weight"):
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        return self.log < other.log


def _check_alphabet(nu: NType, q: Pmf):
    if nu.m != q.m:
        raise MismatchedTypes(f"type has {nu.m} coordinates but pmf has {q.m}")


def _want_exact(q: Pmf | None, n: int, exact, cap):
    cap = EXACT_CAP if cap is None else cap
    if exact is True:
        if q is not None and not q.exact:
            raise ExactUnavailable("exact output needs a rational pmf")
        return True
    if exact is False:
        return False
    return (q is None or q.exact) and n <= cap


# ---------------------------------------------------------------------------
# operations

def multiplicity(nu: NType, exact=None, cap=None) -> Weight:
    """Number of sequences of type ``nu``: n! / prod n_i!."""
    log = math.lgamma(nu.n + 1) - sum(math.lgamma(c + 1) for c in nu.counts)
    if _want_exact(None, nu.n, exact, cap):
        value = math.factorial(nu.n)
        for c in nu.counts:
            value //= math.factorial(c)
        return Weight(log=log, exact=Fraction(value))
    return Weight.from_log(log)


def type_probability(nu: NType, q: Pmf, exact=None, cap=None) -> Weight:
    """Probability that an iid ``q`` sample of size n has type ``nu``."""
    _check_alphabet(nu, q)
    q.require_source()
    want = _want_exact(q, nu.n, exact, cap)
    gamma = multiplicity(nu, exact=want, cap=cap)
    log = gamma.log + sum(c * math.log(float(p)) for c, p in zip(nu.counts, q.probs) if c)
    if want:
        value = gamma.exact
        for c, p in zip(nu.counts, q.probs):
            if c:
                value *= p ** c
        # the exact log is more accurate than the lgamma sum for huge n
        return Weight(log=log_fraction(value), exact=value)
    return Weight.from_log(log)


def i_divergence(p: Pmf | Sequence, q: Pmf | Sequence) -> float:
    """I(p||q) = sum p_i ln(p_i / q_i) with 0 ln 0 = 0; +inf off the support of q."""
    pa = p.array if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    qa = q.array if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    if pa.shape != qa.shape:
        raise MismatchedTypes("pmfs differ in length")
    total = 0.0
    for pi, qi in zip(pa, qa):
        if pi == 0:
            continue
        if qi == 0:
            return math.inf
        total += pi * math.log(pi / qi)
    # rounding can leave a tiny negative value at p == q
    return max(total, 0.0)


def _bracket_product(nu: NType, q: Pmf, want: bool):
    """prod over nonzero coordinates of (q_i / nu_i)^{n_i}, exact and log."""
    n = nu.n
    log = 0.0
    exact = Fraction(1) if want else None
    for c, p in zip(nu.counts, q.probs):
        if c == 0:
            continue
        log += c * (math.log(float(p)) - math.log(c / n))
        if want:
            exact *= (p / Fraction(c, n)) ** c
    if want:
        return Weight(log=log_fraction(exact), exact=exact)
    return Weight.from_log(log)


def _factor(num: int, den: int, power: int, want: bool) -> Weight:
    log = power * (math.log(num) - math.log(den))
    if want:
        return Weight(log=log, exact=Fraction(num, den) ** power)
    return Weight.from_log(log)


def sanov_bounds(nu: NType, q: Pmf, exact=None, cap=None):
    """Lower and upper bracket of ``type_probability(nu, q)``:

    (m/n)^m prod (q_i/nu_i)^{n nu_i}  <  pi(nu; q)  <=  prod (q_i/nu_i)^{n nu_i}

    Zero-count coordinates are left out of the products.
    """
    _check_alphabet(nu, q)
    q.require_source()
    n, m = nu.n, nu.m
    if n < MIN_BOUND_N:
        raise DomainTooSmall(f"bracket needs n >= {MIN_BOUND_N}, got n={n}")
    want = _want_exact(q, n, exact, cap)
    upper = _bracket_product(nu, q, want)
    lower = _factor(m, n, m, want) * upper
    return lower, upper


def probability_ratio_bound(nu: NType, nu_dot: NType, q: Pmf, exact=None, cap=None) -> Weight:
    """Right-hand side of pi(nu)/pi(nu_dot) < (n/m)^m U(nu)/U(nu_dot), where
    U(v) = prod (q_i/v_i)^{n v_i}."""
    if nu.n != nu_dot.n or nu.m != nu_dot.m:
        raise MismatchedTypes("types must share n and m")
    _check_alphabet(nu, q)
    q.require_source()
    n, m = nu.n, nu.m
    if n < MIN_BOUND_N:
        raise DomainTooSmall(f"bound needs n >= {MIN_BOUND_N}, got n={n}")
    want = _want_exact(q, n, exact, cap)
    return _factor(n, m, m, want) * _bracket_product(nu, q, want) / _bracket_product(nu_dot, q, want)


def maxprob_lhs_bounds(nu: NType, nu_hat: NType):
    """Log-space bracket on ln LHS, LHS = (prod n_i! / hat n_i!)^{1/n}, from
    the factorial inequality applied to each count.

    Returns ``(lower, lhs, upper)`` as natural logs.  Zero coordinates are
    omitted from every product.
    """
    if nu.n != nu_hat.n or nu.m != nu_hat.m:
        raise MismatchedTypes("types must share n and m")
    n, m = nu.n, nu.m
    if n < MIN_BOUND_N:
        raise DomainTooSmall(f"bound needs n >= {MIN_BOUND_N}, got n={n}")

    def ent(t):  # ln prod v_i^{v_i}
        return sum(c / n * math.log(c / n) for c in t.counts if c)

    def lprod(t):  # ln prod v_i
        return sum(math.log(c / n) for c in t.counts if c)

    lhs = (sum(math.lgamma(c + 1) for c in nu.counts) - sum(math.lgamma(c + 1) for c in nu_hat.counts)) / n
    lower = ent(nu) - (m / n) * math.log(n) - ent(nu_hat) - lprod(nu_hat) / n
    upper = (m / n) * math.log(n) + ent(nu) + lprod(nu) / n - ent(nu_hat)
    return lower, lhs, upper


def all_types(n: int, m: int):
    """Every n-type on m symbols, lexicographically ordered."""
    from .kernels import enumerate_feasible

    rows = enumerate_feasible(np.zeros((0, m, n + 1)), [], [], n)
    return [NType(tuple(r)) for r in rows.tolist()]
