"""Exact conditional probabilities of type sets and the convergence experiments
built on them (concentration on projections, prefix laws, Sanov rates)."""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constraints import EXACT, ConstraintSet, Exact, PairConstraintSet, Tolerance, enumerate_pair_types, enumerate_types
from .core import EXACT_CAP, NType, Pmf, i_divergence, log_fraction, multiplicity, sanov_bounds, type_probability
from .errors import BallOverlap, EmptyFeasibleSet, PrefixTooLong, PreconditionViolated, ValidationError
from .kernels import log_type_probabilities
from .projections import ProjectionResult, gme_pair_projection, i_projections

WORKERS_ENV = "TYPELAWS_WORKERS"
TIE = 1e-12


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map_cells(fn, items):
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# records and balls

@dataclass(frozen=True)
class Ball:
    """Open ball around ``center``; Euclidean unless ``norm == "max"``."""

    center: tuple
    radius: float
    norm: str = "euclidean"

    def __post_init__(self):
        center = self.center.array if isinstance(self.center, Pmf) else self.center
        object.__setattr__(self, "center", tuple(float(c) for c in center))
        if not self.radius > 0:
            raise ValidationError("ball radius must be positive")
        if self.norm not in ("euclidean", "max"):
            raise ValidationError(f"unknown norm {self.norm!r}")

    def distance(self, p) -> float:
        diff = _as_array(p) - np.asarray(self.center)
        if self.norm == "max":
            return float(np.max(np.abs(diff)))
        return float(np.linalg.norm(diff))

    def contains(self, p) -> bool:
        return self.distance(p) < self.radius


def _as_array(p):
    if isinstance(p, (NType, Pmf)):
        return p.array
    if isinstance(p, tuple) and p and isinstance(p[0], (NType, Pmf)):
        return np.concatenate([c.array for c in p])
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class ExperimentRecord:
    law: str
    n: int
    j: int
    value: object = None
    reference: object = None
    epsilon: float | None = None
    tau: float | None = None
    detail: dict = field(default_factory=dict, compare=False)
    wall_time: float = field(default=0.0, compare=False)

    @property
    def abs_error(self):
        if self.value is None or self.reference is None:
            return None
        return abs(self.value - self.reference)

    @property
    def empty(self) -> bool:
        return bool(self.detail.get("empty"))

    def sort_key(self):
        return (self.law, self.n, self.j)


def _tau_of(mode):
    return float(mode.tau) if isinstance(mode, Tolerance) else None


# ---------------------------------------------------------------------------
# weighted feasible sets

@dataclass(frozen=True)
class TypeDistribution:
    """Pi_n together with the conditional law of a type given membership.

    ``weights`` are either exact nonnegative integers proportional to
    pi(nu; q) (common denominator dropped) or floats, relative to the most
    probable type.  ``log_total`` is ln pi(nu in Pi_n; q).
    """

    n: int
    types: tuple
    weights: tuple
    exact: bool
    log_total: float

    @property
    def total(self):
        return sum(self.weights) if self.exact else math.fsum(self.weights)

    def probability(self, select) -> object:
        """Conditional probability of the types for which ``select`` is true."""
        if not self.types:
            raise EmptyFeasibleSet(f"Pi_n is empty at n={self.n}")
        if self.exact:
            part = sum(w for t, w in zip(self.types, self.weights) if select(t))
            return Fraction(part, self.total)
        part = math.fsum(w for t, w in zip(self.types, self.weights) if select(t))
        return part / self.total

    def conditional(self):
        total = self.total
        if self.exact:
            return [Fraction(w, total) for w in self.weights]
        return [w / total for w in self.weights]


def integer_weights(types: Sequence[NType], q: Pmf):
    """Integers N_nu with pi(nu; q) = N_nu / D^n for D the lcm of q's denominators."""
    d = math.lcm(*(p.denominator for p in q.probs))
    scaled = [p * d for p in q.probs]
    assert all(s.denominator == 1 for s in scaled)
    scaled = [int(s) for s in scaled]
    out = []
    for t in types:
        w = int(multiplicity(t, exact=True).exact)
        for s, c in zip(scaled, t.counts):
            if c:
                w *= s ** c
        out.append(w)
    return out, d


def _use_exact(q: Pmf, n: int, exact, cap):
    cap = EXACT_CAP if cap is None else cap
    if exact is None:
        return q.exact and n <= cap
    if exact and not q.exact:
        from .errors import ExactUnavailable
        raise ExactUnavailable("exact weights need a rational source")
    return bool(exact)


def type_distribution(n: int, constraint: ConstraintSet, mode, q: Pmf, exact=None, cap=None,
                      budget=None) -> TypeDistribution:
    q.require_source()
    types = tuple(enumerate_types(n, constraint, mode, m=q.m, budget=budget))
    return _distribution_of(n, types, q, exact, cap)


def _distribution_of(n, types, q, exact=None, cap=None):
    if not types:
        return TypeDistribution(n, (), (), True, -math.inf)
    if _use_exact(q, n, exact, cap):
        w, d = integer_weights(types, q)
        total = sum(w)
        log_total = math.log(total) - n * math.log(d)
        return TypeDistribution(n, types, tuple(w), True, log_total)
    counts = np.array([t.counts for t in types], dtype=np.int64)
    logs = log_type_probabilities(counts, np.log(q.array))
    top = float(logs.max())
    rel = np.exp(logs - top)
    log_total = top + math.log(math.fsum(rel))
    return TypeDistribution(n, types, tuple(float(v) for v in rel), False, log_total)


# ---------------------------------------------------------------------------
# conditional ball probability

def conditional_ball_probability(n: int, constraint: ConstraintSet, mode, ball: Ball, q: Pmf, exact=None,
                                 budget=None):
    """pi(nu in ball | nu in Pi_n; q), a Fraction when the weights are exact."""
    dist = type_distribution(n, constraint, mode, q, exact=exact, budget=budget)
    if not dist.types:
        raise EmptyFeasibleSet(f"Pi_n is empty at n={n}")
    return dist.probability(ball.contains)


def closest_types_radius(types: Sequence[NType], center, norm="euclidean") -> float:
    """Radius of an open ball around ``center`` holding exactly the nearest types."""
    probe = Ball(center, 1.0, norm)
    d = sorted({round(probe.distance(t), 12) for t in types})
    if not d:
        raise EmptyFeasibleSet("no types to measure")
    if len(d) == 1:
        return d[0] + 1e-9
    return 0.5 * (d[0] + d[1])


def _proper_points(projections: ProjectionResult):
    pts = [p for p, ok in zip(projections.points, projections.proper or [True] * projections.k) if ok]
    if not pts:
        raise ValidationError("no proper projection to concentrate on")
    return pts


def _validate_balls(balls, centers, types):
    for j, b in enumerate(balls):
        for i, c in enumerate(centers):
            if i != j and b.contains(c):
                raise BallOverlap(f"ball {j} radius {b.radius:g} also contains projection {i}")
    for t in types:
        inside = [j for j, b in enumerate(balls) if b.contains(t)]
        if len(inside) > 1:
            raise BallOverlap(f"type {t} lies in balls {inside}")


def icet_experiment(constraint: ConstraintSet, q: Pmf, n_schedule, epsilon=None, mode=EXACT,
                    projections: ProjectionResult | None = None, norm="euclidean", exact=None, budget=None):
    """Conditional mass of Pi_n in a ball around each proper I-projection.

    With ``epsilon=None`` each ball is sized per n to hold only the types
    nearest to its center.  Empty Pi_n produce records flagged ``empty``.
    """
    proj = projections if projections is not None else i_projections(q, constraint)
    centers = _proper_points(proj)
    k = len(centers)
    ref = Fraction(1, k)

    def cell(n):
        t0 = time.perf_counter()
        dist = type_distribution(n, constraint, mode, q, exact=exact, budget=budget)
        if not dist.types:
            return [ExperimentRecord("icet", n, j + 1, None, ref, epsilon, _tau_of(mode), {"empty": True},
                                     time.perf_counter() - t0) for j in range(k)]
        radii = [epsilon if epsilon is not None else closest_types_radius(dist.types, c, norm) for c in centers]
        balls = [Ball(c, r, norm) for c, r in zip(centers, radii)]
        _validate_balls(balls, centers, dist.types)
        out = []
        for j, b in enumerate(balls):
            value = dist.probability(b.contains)
            inside = sum(1 for t in dist.types if b.contains(t))
            out.append(ExperimentRecord(
                "icet", n, j + 1, value, ref, b.radius, _tau_of(mode),
                {"feasible": len(dist.types), "in_ball": inside}, time.perf_counter() - t0))
        return out

    records = [r for rs in _map_cells(cell, n_schedule) for r in rs]
    return sorted(records, key=ExperimentRecord.sort_key)


def cwlln_experiment(constraint: ConstraintSet, q: Pmf, n_schedule, epsilon, mode=EXACT, norm="max", exact=None,
                     budget=None):
    """Single-projection concentration; ``norm="max"`` is the per-coordinate form."""
    proj = i_projections(q, constraint)
    if proj.k != 1:
        raise ValidationError(f"expected a unique I-projection, found {proj.k}")
    recs = icet_experiment(constraint, q, n_schedule, epsilon, mode, proj, norm, exact, budget)
    return [ExperimentRecord("cwlln", r.n, r.j, r.value, r.reference, r.epsilon, r.tau, r.detail, r.wall_time)
            for r in recs]


# ---------------------------------------------------------------------------
# prefix (urn) probabilities

def _falling(a: int, t: int) -> int:
    out = 1
    for i in range(t):
        out *= a - i
    return out


def prefix_given_type(nu: NType, prefix: Sequence[int]) -> Fraction:
    """Probability that a uniformly ordered sequence of type ``nu`` starts with ``prefix``."""
    t = len(prefix)
    if t > nu.n:
        raise PrefixTooLong(f"prefix length {t} exceeds n={nu.n}")
    tc = [0] * nu.m
    for s in prefix:
        if not 0 <= s < nu.m:
            raise ValidationError(f"symbol index {s} out of range")
        tc[s] += 1
    num = 1
    for c, ti in zip(nu.counts, tc):
        num *= _falling(c, ti)
    return Fraction(num, _falling(nu.n, t))


def egcp_prefix_probability(n: int, constraint: ConstraintSet, mode, q: Pmf, prefix: Sequence[int], exact=None,
                            budget=None):
    """pi(X_1..X_t = prefix | nu^n in Pi_n; q) by exact urn weights."""
    if len(prefix) > n:
        raise PrefixTooLong(f"prefix length {len(prefix)} exceeds n={n}")
    dist = type_distribution(n, constraint, mode, q, exact=exact, budget=budget)
    return _prefix_from(dist, prefix)


def _prefix_from(dist: TypeDistribution, prefix):
    if not dist.types:
        raise EmptyFeasibleSet(f"Pi_n is empty at n={dist.n}")
    if not prefix:
        return Fraction(1) if dist.exact else 1.0
    if dist.exact:
        num = sum(w * prefix_given_type(t, prefix) for t, w in zip(dist.types, dist.weights))
        return num / dist.total
    num = math.fsum(w * float(prefix_given_type(t, prefix)) for t, w in zip(dist.types, dist.weights))
    return num / dist.total


def mixture_prefix_limit(projections: ProjectionResult, prefix) -> float:
    """Equal-weight mixture over proper projections of iid prefix probabilities."""
    pts = _proper_points(projections)
    return math.fsum(math.prod(p.array[s] for s in prefix) for p in pts) / len(pts)


def egcp_experiment(constraint: ConstraintSet, q: Pmf, n_schedule, t=1, mode=EXACT, exact=None,
                    projections: ProjectionResult | None = None, budget=None):
    """Every length-``t`` prefix per n, against the mixture limit.

    Records are indexed by ``j``, the position of the prefix in
    lexicographic order of symbol tuples.
    """
    import itertools

    proj = projections if projections is not None else i_projections(q, constraint)
    prefixes = list(itertools.product(range(q.m), repeat=t))
    limits = [mixture_prefix_limit(proj, pre) for pre in prefixes]

    def cell(n):
        t0 = time.perf_counter()
        dist = type_distribution(n, constraint, mode, q, exact=exact, budget=budget)
        if not dist.types:
            return [ExperimentRecord("egcp", n, j + 1, None, lim, None, _tau_of(mode), {"empty": True, "prefix": pre})
                    for j, (pre, lim) in enumerate(zip(prefixes, limits))]
        return [ExperimentRecord("egcp", n, j + 1, _prefix_from(dist, pre), lim, None, _tau_of(mode),
                                 {"prefix": pre}, time.perf_counter() - t0)
                for j, (pre, lim) in enumerate(zip(prefixes, limits))]

    records = [r for rs in _map_cells(cell, n_schedule) for r in rs]
    return sorted(records, key=ExperimentRecord.sort_key)


# ---------------------------------------------------------------------------
# Sanov rates

def sanov_rate(n_schedule, constraint: ConstraintSet, mode, q: Pmf, projections: ProjectionResult | None = None,
               exact=None, budget=None):
    """(1/n) ln pi(nu^n in Pi_n; q) per n, with reference -I(p_hat||q).

    ``detail`` carries brackets: ``lower``/``upper`` from summing the per-type
    bounds, ``st_lower``/``st_upper`` from the max-type bound and N < (n+1)^m.
    """
    proj = projections if projections is not None else i_projections(q, constraint)
    reference = -proj.objective
    m = q.m

    def cell(n):
        t0 = time.perf_counter()
        dist = type_distribution(n, constraint, mode, q, exact=exact, budget=budget)
        if not dist.types:
            return ExperimentRecord("rates", n, 1, None, reference, None, _tau_of(mode), {"empty": True})
        rate = dist.log_total / n
        detail = {"feasible": len(dist.types)}
        if n >= 7:
            bounds = [sanov_bounds(t, q, exact=False) for t in dist.types]
            lows = np.array([b[0].log for b in bounds])
            ups = np.array([b[1].log for b in bounds])
            detail["lower"] = _logsumexp(lows) / n
            detail["upper"] = _logsumexp(ups) / n
            top = float(ups.max())
            detail["st_lower"] = (top + m * math.log(m / n)) / n
            detail["st_upper"] = (top + m * math.log(n + 1)) / n
        return ExperimentRecord("rates", n, 1, rate, reference, None, _tau_of(mode), detail,
                                time.perf_counter() - t0)

    return sorted(_map_cells(cell, n_schedule), key=ExperimentRecord.sort_key)


def _logsumexp(v):
    top = float(np.max(v))
    return top + math.log(math.fsum(np.exp(v - top)))


# ---------------------------------------------------------------------------
# pairs of sources

def rcwlln_experiment(q1: Pmf, q2: Pmf, pair_set: PairConstraintSet, n_schedule, epsilon, mode=EXACT,
                      exact=None, budget=None):
    """Conditional probability that a jointly drawn type pair lies within
    ``epsilon`` (product-space Euclidean) of the GME pair projection."""
    q1.require_source()
    q2.require_source()
    cells = {}
    for n in n_schedule:
        cells[n] = enumerate_pair_types(n, pair_set, mode, budget=budget)
    if all(not v for v in cells.values()):
        raise EmptyFeasibleSet("no feasible pair at any n in the schedule")
    proj = gme_pair_projection(q1, q2, pair_set)
    center = np.concatenate([c.array for c in proj.points[0]])
    ball = Ball(tuple(center), epsilon)

    def cell(n):
        t0 = time.perf_counter()
        pairs = cells[n]
        if not pairs:
            return ExperimentRecord("rcwlln", n, 1, None, 1, epsilon, _tau_of(mode), {"empty": True})
        vecs = np.array([a.counts + b.counts for a, b in pairs], dtype=float) / n
        inside = (np.linalg.norm(vecs - center, axis=1) < epsilon).tolist()
        use_exact = _use_exact(q1, n, exact, None) and _use_exact(q2, n, exact, None)
        firsts = sorted({p[0] for p in pairs})
        seconds = sorted({p[1] for p in pairs})
        if use_exact:
            w1 = dict(zip(firsts, integer_weights(firsts, q1)[0]))
            w2 = dict(zip(seconds, integer_weights(seconds, q2)[0]))
            ws = [w1[a] * w2[b] for a, b in pairs]
            value = Fraction(sum(w for w, ok in zip(ws, inside) if ok), sum(ws))
        else:
            l1 = dict(zip(firsts, log_type_probabilities(np.array([t.counts for t in firsts]), np.log(q1.array))))
            l2 = dict(zip(seconds, log_type_probabilities(np.array([t.counts for t in seconds]), np.log(q2.array))))
            logs = np.array([l1[a] + l2[b] for a, b in pairs])
            ws = np.exp(logs - logs.max())
            value = math.fsum(ws[np.array(inside)]) / math.fsum(ws)
        return ExperimentRecord("rcwlln", n, 1, value, 1, epsilon, _tau_of(mode),
                                {"feasible": len(pairs), "in_ball": int(sum(inside))}, time.perf_counter() - t0)

    return sorted(_map_cells(cell, list(n_schedule)), key=ExperimentRecord.sort_key)


# ---------------------------------------------------------------------------
# rational projections

@dataclass(frozen=True)
class RationalConcentration:
    gamma: Fraction | None
    certified: bool
    rate: float
    records: tuple


def gamma_certificate(nu: NType, nu_dot: NType, q: Pmf):
    """Exact gamma with pi(k nu_dot)/pi(k nu) <= gamma^k for every k >= 1.

    With d = counts(nu) - counts(nu_dot), each factorial ratio is bounded by
    a power of k n_i, the powers of k cancel, and
    gamma = prod_i (n_i / q_i)^{d_i}.  Needs n_i > 0 wherever d_i < 0;
    returns None otherwise.
    """
    out = Fraction(1)
    for c, cd, p in zip(nu.counts, nu_dot.counts, q.probs):
        d = c - cd
        if d == 0:
            continue
        if c == 0:
            return None
        out *= (Fraction(c) / p) ** d
    return out


def rational_concentration(nu: NType, nu_dot: NType, q: Pmf, k_schedule) -> RationalConcentration:
    """Exact decay of r_k = pi(k nu_dot)/pi(k nu) for a less probable ``nu_dot``."""
    if nu.n != nu_dot.n or nu.m != nu_dot.m:
        raise PreconditionViolated("types must share n and m")
    if not q.exact:
        raise PreconditionViolated("source must be rational")
    p_nu = type_probability(nu, q, exact=True).exact
    p_dot = type_probability(nu_dot, q, exact=True).exact
    if not p_dot < p_nu:
        raise PreconditionViolated("need pi(nu_dot; q) < pi(nu; q) strictly")
    gamma = gamma_certificate(nu, nu_dot, q)
    certified = gamma is not None and gamma < 1
    n = nu.n
    # per-k asymptotic ratio exp(-n (I(nu_dot||q) - I(nu||q)))
    rate = math.exp(-n * (i_divergence(nu_dot.array, q.array) - i_divergence(nu.array, q.array)))
    records = []
    for k in k_schedule:
        big, small = nu.scaled(k), nu_dot.scaled(k)
        r = type_probability(small, q, exact=True, cap=math.inf).exact / type_probability(big, q, exact=True, cap=math.inf).exact
        bound = gamma ** k if gamma is not None else None
        records.append(ExperimentRecord(
            "rational", k * n, k, r, bound, None, None,
            {"mass_less_probable": r / (1 + r), "certified": certified,
             "holds": bool(bound is not None and r <= bound)}))
    return RationalConcentration(gamma, certified, rate, tuple(records))
