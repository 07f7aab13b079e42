"""I-, mu-, tau- and pair (GME) projections of a source onto a feasible set."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .constraints import (
    EXACT,
    ConstraintSet,
    Frequency,
    FullSimplex,
    GeneralizedFrequency,
    Line,
    Moment,
    PairConstraintSet,
    PointSet,
    Union,
    enumerate_types,
)
from .core import NType, Pmf, i_divergence, type_probability
from .errors import (
    EmptyIntersection,
    FeasibilityError,
    InfeasibleMoment,
    NoConvergence,
    ValidationError,
)

CLUSTER_RADIUS = 1e-7
GLOBAL_GAP = 1e-9
TIE_REL = 1e-12
PROPER_RADII = (1e-3, 1e-4, 1e-5, 1e-6)


@dataclass(frozen=True)
class LagrangeSolution:
    lam: float
    normalizer: float


@dataclass(frozen=True)
class ProjectionResult:
    points: tuple
    objective: float
    kind: str
    diagnostics: dict = field(default_factory=dict, compare=False)
    proper: tuple = ()

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def empty(self) -> bool:
        return not self.points

    def arrays(self):
        out = []
        for p in self.points:
            if isinstance(p, tuple):
                out.append(np.concatenate([_as_array(c) for c in p]))
            else:
                out.append(_as_array(p))
        return out


def _as_array(p):
    if isinstance(p, (Pmf, NType)):
        return p.array
    return np.asarray(p, dtype=float)


def _float_pmf(p) -> Pmf:
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    total = math.fsum(p)
    return Pmf(tuple(float(v) for v in p / total))


# ---------------------------------------------------------------------------
# exponential family on a single linear moment

def _tilted(logq, u, lam):
    z = logq - lam * u
    zmax = z.max()
    w = np.exp(z - zmax)
    s = w.sum()
    return w / s, zmax + math.log(s)


def _solve_monotone(mean, var, a, lam0=0.0):
    """Find lam with mean(lam) = a for a strictly decreasing mean map.

    Newton steps on the analytic derivative -var(lam), falling back to
    bisection whenever a step leaves the current bracket.
    """
    lo, hi = lam0 - 1.0, lam0 + 1.0
    grow = 0
    while mean(lo) < a:
        lo = lam0 - 2.0 ** grow
        grow += 1
        if grow > 1100:
            raise NoConvergence("could not bracket multiplier (low side)")
    grow = 0
    while mean(hi) > a:
        hi = lam0 + 2.0 ** grow
        grow += 1
        if grow > 1100:
            raise NoConvergence("could not bracket multiplier (high side)")
    lam = min(max(lam0, lo), hi)
    it = 0
    for it in range(1, 400):
        r = mean(lam) - a
        if r == 0:
            break
        if r > 0:
            lo = lam
        else:
            hi = lam
        v = var(lam)
        step = lam + r / v if v > 0 else math.nan
        lam = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, abs(lam)):
            break
    return lam, it


def _moment_range(u, a):
    lo, hi = float(np.min(u)), float(np.max(u))
    a = float(a)
    if not (lo < a < hi):
        raise InfeasibleMoment(f"moment level {a} outside the open range ({lo}, {hi})")
    return a


def i_projection_moment(q: Pmf, u, a) -> ProjectionResult:
    """Unique I-projection of ``q`` on {p : sum p_i u_i = a}.

    p_i = k(lam) q_i exp(-lam u_i), lam chosen by safeguarded Newton on the
    strictly decreasing mean map.
    """
    q.require_source()
    u = np.asarray([float(x) for x in u])
    if len(u) != q.m:
        raise ValidationError("moment vector and source differ in length")
    logq = np.log(q.array)
    if np.ptp(u) == 0:
        if float(a) != u[0]:
            raise InfeasibleMoment("constant moment vector cannot reach the level")
        return ProjectionResult((_float_pmf(q.array),), 0.0, "I", {"lagrange": LagrangeSolution(0.0, 1.0)}, (True,))
    a = _moment_range(u, a)

    def mean(lam):
        return float(_tilted(logq, u, lam)[0] @ u)

    def var(lam):
        p = _tilted(logq, u, lam)[0]
        mu = p @ u
        return float(p @ (u - mu) ** 2)

    lam, iters = _solve_monotone(mean, var, a)
    p, log_z = _tilted(logq, u, lam)
    res = abs(float(p @ u) - a)
    lag = LagrangeSolution(lam=lam, normalizer=math.exp(-log_z))
    pt = _float_pmf(p)
    diag = {"lagrange": lag, "iterations": iters, "residual": res}
    return ProjectionResult((pt,), i_divergence(pt, q), "I", diag, (True,))


# ---------------------------------------------------------------------------
# multi-start KKT machinery for one separable constraint sum c_i p_i^beta = a

class _IObjective:
    def __init__(self, q):
        self.logq = np.log(q)

    def value(self, p):
        nz = p > 0
        return float(np.sum(p[nz] * (np.log(p[nz]) - self.logq[nz])))

    def grad(self, p):
        return np.log(p) - self.logq + 1.0

    def hess(self, p):
        return 1.0 / p


class _TsallisObjective:
    """Negative q-relative Tsallis entropy, (sum p^a q^(1-a) - 1)/(a-1).

    Written through expm1 so that alpha -> 1 tends smoothly to I(p||q).
    """

    def __init__(self, q, alpha):
        self.logq = np.log(q)
        self.alpha = float(alpha)
        if self.alpha <= 0:
            raise ValidationError("entropy index must be positive")

    def value(self, p):
        a = self.alpha
        nz = p > 0
        L = np.log(p[nz]) - self.logq[nz]
        if a == 1:
            return float(np.sum(p[nz] * L))
        # terms for p_i = 0 contribute -p_i/(a-1) * ... = 0 when a > 1
        return float(np.sum(p[nz] * np.expm1((a - 1) * L)) / (a - 1))

    def grad(self, p):
        a = self.alpha
        L = np.log(p) - self.logq
        if a == 1:
            return L + 1.0
        return a * np.expm1((a - 1) * L) / (a - 1) + 1.0

    def hess(self, p):
        a = self.alpha
        L = np.log(p) - self.logq
        return a * np.exp((a - 1) * L) / p


class _SeparableConstraint:
    def __init__(self, c, beta, a):
        self.c = np.asarray(c, dtype=float)
        self.beta = float(beta)
        self.a = float(a)

    def value(self, p):
        return float(np.sum(self.c * p ** self.beta)) - self.a

    def grad(self, p):
        b = self.beta
        return self.c * b * p ** (b - 1)

    def hess(self, p):
        b = self.beta
        return self.c * b * (b - 1) * p ** (b - 2)


def _to_boundary(p, dp, frac=0.99):
    neg = dp < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, frac * float(np.min(-p[neg] / dp[neg])))


def _restore_feasibility(p, con, iters=60):
    """Minimum-norm Gauss-Newton onto {sum p = 1, con(p) = 0}, staying positive."""
    for _ in range(iters):
        F = np.array([con.value(p), p.sum() - 1.0])
        if np.max(np.abs(F)) <= 1e-15:
            return p
        J = np.vstack([con.grad(p), np.ones_like(p)])
        try:
            dp = -J.T @ np.linalg.solve(J @ J.T, F)
        except np.linalg.LinAlgError:
            return None
        p = p + _to_boundary(p, dp) * dp
        if np.any(p <= 0):
            return None
    F = np.array([con.value(p), p.sum() - 1.0])
    return p if np.max(np.abs(F)) <= 1e-12 else None


def _kkt_newton(p, obj, con, iters=200, tol=1e-13):
    m = len(p)
    J = np.vstack([con.grad(p), np.ones(m)])
    lam, mu = np.linalg.lstsq(J.T, -obj.grad(p), rcond=None)[0]

    def F(p, lam, mu):
        return np.concatenate([obj.grad(p) + lam * con.grad(p) + mu, [con.value(p), p.sum() - 1.0]])

    r = F(p, lam, mu)
    for it in range(iters):
        if np.max(np.abs(r)) <= tol:
            return p, lam, it
        H = np.diag(obj.hess(p) + lam * con.hess(p))
        g = con.grad(p)
        K = np.zeros((m + 2, m + 2))
        K[:m, :m] = H
        K[:m, m] = K[m, :m] = g
        K[:m, m + 1] = K[m + 1, :m] = 1.0
        try:
            step = np.linalg.solve(K, -r)
        except np.linalg.LinAlgError:
            return None
        dp, dl, dm = step[:m], step[m], step[m + 1]
        t = _to_boundary(p, dp)
        norm0 = np.linalg.norm(r)
        while True:
            pn = p + t * dp
            rn = F(pn, lam + t * dl, mu + t * dm)
            if np.all(pn > 0) and np.linalg.norm(rn) < (1 - 1e-4 * t) * norm0:
                break
            t *= 0.5
            if t < 1e-10:
                # stalled; typically drifting onto the simplex boundary
                return None
        p, lam, mu, r = pn, lam + t * dl, mu + t * dm, rn
    if np.max(np.abs(r)) <= 1e-10:
        return p, lam, iters
    return None


def _descend(p0, obj, con):
    """Local minimizer from a feasible start: SLSQP to get into the basin,
    then KKT Newton to polish to 1e-13."""
    m = len(p0)
    cons = [{"type": "eq", "fun": con.value, "jac": lambda p: con.grad(p)},
            {"type": "eq", "fun": lambda p: p.sum() - 1.0, "jac": lambda p: np.ones(m)}]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(obj.value, p0, jac=obj.grad, method="SLSQP", constraints=cons,
                       bounds=[(1e-12, 1.0)] * m, options={"ftol": 1e-14, "maxiter": 300})
    p = _restore_feasibility(np.clip(res.x, 1e-12, None), con)
    if p is None:
        return None
    return _kkt_newton(p, obj, con)


def _reduced_hessian_min_eig(p, lam, obj, con):
    m = len(p)
    J = np.vstack([con.grad(p), np.ones(m)])
    _, s, vt = np.linalg.svd(J)
    rank = int(np.sum(s > 1e-12 * s[0]))
    Z = vt[rank:].T
    if Z.shape[1] == 0:
        return math.inf
    H = np.diag(obj.hess(p) + lam * con.hess(p))
    return float(np.min(np.linalg.eigvalsh(Z.T @ H @ Z)))


def _permutation_group(q: Pmf, constraint: ConstraintSet, limit=8):
    m = q.m
    if m > limit:
        return [tuple(range(m))]
    perms = []
    for perm in itertools.permutations(range(m)):
        if all(q.probs[perm[i]] == q.probs[i] for i in range(m)) and constraint.symmetry_ok(perm):
            perms.append(perm)
    return perms


def _cluster(points, radius=CLUSTER_RADIUS):
    kept = []
    for p in points:
        if all(np.linalg.norm(p - k) > radius for k in kept):
            kept.append(p)
    # lexicographic order, largest first coordinate first
    kept.sort(key=lambda v: tuple(-np.round(v, 9)))
    return kept


def _multistart(q: Pmf, constraint, con, obj, kind, starts=None, seed=0):
    m = q.m
    starts = 20 * math.factorial(m) if starts is None else int(starts)
    if starts < min(math.factorial(m), 720):
        raise ValidationError(f"need at least m! = {math.factorial(m)} starts")
    rng = np.random.default_rng(seed)
    found, local, failed = [], [], 0
    for _ in range(starts):
        p0 = rng.dirichlet(np.ones(m))
        p0 = _restore_feasibility(p0, con)
        if p0 is None:
            failed += 1
            continue
        sol = _descend(p0, obj, con)
        if sol is None:
            failed += 1
            continue
        p, lam, _ = sol
        if _reduced_hessian_min_eig(p, lam, obj, con) <= 1e-10:
            local.append(p)
            continue
        found.append(p)
    if not found:
        raise NoConvergence("no local minimizer found", {"starts": starts, "failed": failed, "saddles": len(local)})
    vals = np.array([obj.value(p) for p in found])
    best = float(vals.min())
    glob = [p for p, v in zip(found, vals) if v <= best + GLOBAL_GAP]
    discarded = _cluster([p for p, v in zip(found, vals) if v > best + GLOBAL_GAP], 1e-6)
    completed = []
    for perm in _permutation_group(q, constraint):
        completed.extend(p[list(perm)] for p in glob)
    points = _cluster(completed)
    objs = [obj.value(p) for p in points]
    diag = {
        "starts": starts,
        "failed_starts": failed,
        "non_minima": len(local),
        "local_optima": [tuple(map(float, p)) for p in discarded],
        "objective_spread": float(max(objs) - min(objs)),
        "residuals": [abs(con.value(p)) for p in points],
    }
    pts = tuple(_float_pmf(p) for p in points)
    proper = tuple(is_proper(p, constraint) for p in pts)
    return ProjectionResult(pts, float(min(objs)), kind, diag, proper)


def _check_frequency_level(m, alpha, a):
    lo, hi = sorted((m ** (1.0 - alpha), 1.0))
    if not (lo - 1e-15 <= a <= hi + 1e-15):
        raise FeasibilityError(f"sum p^{alpha} = {a} has no solution on the {m}-simplex")
    return lo, hi


def _frequency_special(q, alpha, a, kind, objective):
    """Degenerate levels where the feasible set is a finite set of points."""
    m = q.m
    if alpha == 1:
        if abs(a - 1.0) > 1e-15:
            raise FeasibilityError("sum p = a with a != 1")
        return None  # whole simplex
    uniform_level = m ** (1.0 - alpha)
    if abs(a - uniform_level) <= 1e-14:
        u = _float_pmf(np.ones(m))
        return ProjectionResult((u,), objective(u.array), kind, {"degenerate": "uniform"}, (False,))
    if abs(a - 1.0) <= 1e-14:
        verts = [np.eye(m)[i] for i in range(m)]
        vals = [objective(v) for v in verts]
        best = min(vals)
        pts = tuple(_float_pmf(v) for v, val in zip(verts, vals) if val <= best + GLOBAL_GAP)
        return ProjectionResult(pts, best, kind, {"degenerate": "vertices"}, tuple(False for _ in pts))
    return None


def i_projections_frequency(q: Pmf, alpha, a, starts=None, seed=0) -> ProjectionResult:
    """All I-projections of ``q`` on {sum p_i^alpha = a} (non-convex for alpha > 1)."""
    q.require_source()
    alpha, a = float(alpha), float(a)
    m = q.m
    _check_frequency_level(m, alpha, a)
    obj = _IObjective(q.array)
    special = _frequency_special(q, alpha, a, "I", obj.value)
    if special is not None:
        return special
    if alpha == 1:
        return ProjectionResult((_float_pmf(q.array),), 0.0, "I", {}, (True,))
    con = _SeparableConstraint(np.ones(m), alpha, a)
    return _multistart(q, Frequency(alpha, a, m=m), con, obj, "I", starts, seed)


# ---------------------------------------------------------------------------
# one-parameter sets

def _line_interval(line: Line):
    lo, hi = line.parameter_range()
    if not (lo < hi) or math.isnan(lo):
        raise EmptyIntersection("line misses the open simplex")
    return lo, hi


def _minimize_on_line(dfun, lo, hi, tol=1e-10):
    """Minimize a strictly convex function on (lo, hi) from its derivative.

    Derivative bisection; ends are handled by probing just inside the interval.
    """
    eps = (hi - lo) * 1e-15
    d_lo, d_hi = dfun(lo + eps), dfun(hi - eps)
    if d_lo >= 0:
        return lo + eps, 0
    if d_hi <= 0:
        return hi - eps, 0
    a, b = lo + eps, hi - eps
    it = 0
    while b - a > tol * 1e-3 and it < 200:
        mid = 0.5 * (a + b)
        if dfun(mid) > 0:
            b = mid
        else:
            a = mid
        it += 1
    return 0.5 * (a + b), it


def _line_projection(q: Pmf, line: Line, obj, kind):
    if line.m != q.m:
        raise ValidationError("line and source differ in length")
    lo, hi = _line_interval(line)
    d = np.array(line.direction, dtype=float)

    def dfun(t):
        p = line.point(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = obj.grad(np.clip(p, 1e-300, None))
        return float(np.dot(d, g))

    t, it = _minimize_on_line(dfun, lo, hi)
    p = _float_pmf(line.point(t))
    diag = {"parameter": t, "iterations": it, "interval": (lo, hi), "residual": line.residual(p)}
    return ProjectionResult((p,), obj.value(p.array), kind, diag, (is_proper(p, line),))


def i_projection_line(q: Pmf, line: Line) -> ProjectionResult:
    q.require_source()
    return _line_projection(q, line, _IObjective(q.array), "I")


# ---------------------------------------------------------------------------
# dispatch over constraint sets

def i_projections(q: Pmf, constraint: ConstraintSet, starts=None, seed=0) -> ProjectionResult:
    """Every I-projection of ``q`` on ``constraint``."""
    q.require_source()
    if isinstance(constraint, FullSimplex):
        return ProjectionResult((_float_pmf(q.array),), 0.0, "I", {}, (True,))
    if isinstance(constraint, Moment):
        return i_projection_moment(q, constraint.u, constraint.a)
    if isinstance(constraint, Frequency):
        return i_projections_frequency(q, constraint.alpha, constraint.a, starts, seed)
    if isinstance(constraint, Line):
        return i_projection_line(q, constraint)
    if isinstance(constraint, GeneralizedFrequency):
        obj = _IObjective(q.array)
        con = _SeparableConstraint(np.array(constraint.x, float) - float(constraint.b), constraint.alpha, 0.0)
        return _multistart(q, constraint, con, obj, "I", starts, seed)
    if isinstance(constraint, PointSet):
        pts = constraint.pmfs()
        vals = [i_divergence(p, q) for p in pts]
        best = min(vals)
        keep = sorted({p.probs for p, v in zip(pts, vals) if v <= best + GLOBAL_GAP}, reverse=True)
        return ProjectionResult(tuple(Pmf(k, exact=True) for k in keep), best, "I", {}, tuple(False for _ in keep))
    if isinstance(constraint, Union):
        parts = [i_projections(q, s, starts, seed) for s in constraint.members]
        best = min(r.objective for r in parts)
        cand, proper = [], []
        for r in parts:
            if r.objective <= best + GLOBAL_GAP:
                cand.extend(r.points)
                proper.extend(r.proper)
        arrays = [p.array for p in cand]
        kept = _cluster(arrays)
        order = [next(i for i, a in enumerate(arrays) if np.array_equal(a, k)) for k in kept]
        return ProjectionResult(tuple(cand[i] for i in order), best, "I",
                                {"members": [r.diagnostics for r in parts]}, tuple(proper[i] for i in order))
    raise ValidationError(f"no I-projection solver for {type(constraint).__name__}")


def is_proper(point, constraint: ConstraintSet) -> bool:
    """True when ``point`` is not an isolated point of the feasible set.

    Probes balls of radius 1e-3 .. 1e-6 for another feasible point by stepping
    along the tangent space and restoring feasibility.
    """
    p = _as_array(point)
    if isinstance(constraint, PointSet):
        return False
    if isinstance(constraint, FullSimplex):
        return True
    if isinstance(constraint, Union):
        members = [s for s in constraint.members if float(s.residual(p)) <= 1e-9]
        return any(is_proper(p, s) for s in members)
    if isinstance(constraint, Line):
        lo, hi = constraint.parameter_range()
        return bool(lo < hi)
    if isinstance(constraint, Moment):
        con = _SeparableConstraint(constraint.u, 1.0, constraint.a)
    elif isinstance(constraint, Frequency):
        con = _SeparableConstraint(np.ones(len(p)), constraint.alpha, constraint.a)
    elif isinstance(constraint, GeneralizedFrequency):
        con = _SeparableConstraint(np.array(constraint.x, float) - float(constraint.b), constraint.alpha, 0.0)
    else:
        return False
    if np.any(p <= 0):
        return False
    J = np.vstack([con.grad(p), np.ones(len(p))])
    _, s, vt = np.linalg.svd(J)
    rank = int(np.sum(s > 1e-12 * s[0]))
    if rank >= len(p):
        return False
    direction = vt[rank]
    for r in PROPER_RADII:
        cand = _restore_feasibility(p + 0.5 * r * direction, con)
        if cand is None:
            return False
        dist = np.linalg.norm(cand - p)
        if not (0 < dist < r):
            return False
    return True


# ---------------------------------------------------------------------------
# mu-projections over n-types

def mu_projection(q: Pmf, n: int, constraint: ConstraintSet, mode=EXACT, budget=None, exact=None) -> ProjectionResult:
    """All maximum-probability n-types in Pi_n (ties kept, exact when possible)."""
    q.require_source()
    types = enumerate_types(n, constraint, mode, m=q.m, budget=budget)
    if not types:
        return ProjectionResult((), -math.inf, "mu", {"empty": True, "n": n})
    weights = [type_probability(t, q, exact=exact) for t in types]
    if all(w.exact is not None for w in weights):
        best = max(w.exact for w in weights)
        winners = [t for t, w in zip(types, weights) if w.exact == best]
        best_log = next(w.log for w in weights if w.exact == best)
        diag = {"n": n, "feasible": len(types), "max_probability": best, "exact": True}
    else:
        logs = np.array([w.log for w in weights])
        best_log = float(logs.max())
        tie = TIE_REL * max(1.0, abs(best_log))
        winners = [t for t, lw in zip(types, logs) if lw >= best_log - tie]
        diag = {"n": n, "feasible": len(types), "max_log_probability": best_log, "exact": False}
    winners.sort(reverse=True)
    return ProjectionResult(tuple(winners), best_log, "mu", diag)


# ---------------------------------------------------------------------------
# tau-projections

def tau_projection(q: Pmf, constraint: ConstraintSet, alpha_entropy=None, starts=None, seed=0) -> ProjectionResult:
    """Maximizers of the (q-relative) Tsallis entropy of index ``alpha_entropy``.

    For uniform ``q`` this is the ordinary Tsallis entropy
    (1 - sum p_i^alpha) / (alpha - 1).  The index defaults to the constraint's
    frequency exponent, or 2.
    """
    q.require_source()
    if alpha_entropy is None:
        alpha_entropy = float(getattr(constraint, "alpha", 2.0))
    alpha_entropy = float(alpha_entropy)
    obj = _TsallisObjective(q.array, alpha_entropy)
    if isinstance(constraint, FullSimplex):
        # stationarity alpha (p/q)^(alpha-1) = const forces p = q
        p = _float_pmf(q.array)
        return ProjectionResult((p,), obj.value(p.array), "tau", {}, (True,))
    if isinstance(constraint, Line):
        return _line_projection(q, constraint, obj, "tau")
    if isinstance(constraint, Moment):
        a = _moment_range(np.array(constraint.u, float), constraint.a)
        con = _SeparableConstraint(constraint.u, 1.0, a)
    elif isinstance(constraint, GeneralizedFrequency):
        con = _SeparableConstraint(np.array(constraint.x, float) - float(constraint.b), constraint.alpha, 0.0)
    elif isinstance(constraint, Frequency):
        alpha, a = float(constraint.alpha), float(constraint.a)
        _check_frequency_level(q.m, alpha, a)
        if alpha == alpha_entropy and len(set(q.probs)) == 1:
            raise FeasibilityError("Tsallis entropy is constant on this frequency set")
        special = _frequency_special(q, alpha, a, "tau", obj.value)
        if special is not None:
            return special
        con = _SeparableConstraint(np.ones(q.m), alpha, a)
    else:
        raise ValidationError(f"no tau-projection solver for {type(constraint).__name__}")
    return _multistart(q, constraint, con, obj, "tau", starts, seed)


# ---------------------------------------------------------------------------
# pair projection

def gme_pair_projection(q1: Pmf, q2: Pmf, pair_set: PairConstraintSet) -> ProjectionResult:
    """Pair minimizing I(p1||q1) + I(p2||q2) subject to the joint moment.

    Both components are tilted by one shared multiplier on the affine constraint.
    """
    q1.require_source()
    q2.require_source()
    x = np.array([float(v) for v in pair_set.x])
    y = np.array([float(v) for v in pair_set.y])
    if len(x) != q1.m or len(y) != q2.m:
        raise ValidationError("pair alphabets and sources differ in length")
    lo, hi = pair_set.range
    a = float(pair_set.a)
    if not (lo < a < hi):
        raise InfeasibleMoment(f"pair level {a} outside the open range ({lo}, {hi})")
    l1, l2 = np.log(q1.array), np.log(q2.array)

    def parts(lam):
        return _tilted(l1, x, lam)[0], _tilted(l2, y, lam)[0]

    def mean(lam):
        p1, p2 = parts(lam)
        return float(p1 @ x + p2 @ y)

    def var(lam):
        p1, p2 = parts(lam)
        return float(p1 @ (x - p1 @ x) ** 2 + p2 @ (y - p2 @ y) ** 2)

    lam, iters = _solve_monotone(mean, var, a)
    p1, p2 = parts(lam)
    pair = (_float_pmf(p1), _float_pmf(p2))
    obj = i_divergence(pair[0], q1) + i_divergence(pair[1], q2)
    diag = {"lagrange": LagrangeSolution(lam, math.nan), "iterations": iters,
            "residual": pair_set.residual(*pair)}
    return ProjectionResult((pair,), obj, "GME", diag, (True,))
