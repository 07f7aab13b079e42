"""Flat ``key = value`` experiment configs.

One experiment per file.  Lines are ``key = value``; ``#`` starts a comment.
Lists are comma separated, lists of lists use ``;`` between rows, and a
schedule may mix integers and inclusive ``start:stop:step`` ranges.  Numbers keep their
exact value: ``0.42`` is read as 21/50 and ``1/3`` as a fraction.

Keys
    law          enumerate | project | icet | cwlln | egcp | rates | rcwlln | rational
    alphabet     symbol values x_1..x_m (default 1..m)
    m            alphabet size when ``alphabet`` is absent
    q, q2        source pmfs, or ``uniform``
    constraint   full | moment | frequency | genfreq | line | points | pair
    u, a         moment values and level; several levels give a union of mcc
    alpha, b     frequency exponent and generalized-frequency offset
    base, direction   line parametrization
    points       n0-types, e.g. ``4,3,3; 6,3,1``
    y            second alphabet of a pair constraint
    n            n-schedule
    epsilon, tau, norm, prefix, t, alpha_entropy, projection
    nu, nu_dot, k     rational-concentration types and k-schedule
    mode         exact | float (weight arithmetic)
    format       csv | json
    budget       enumeration budget
    seed, starts multistart controls
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .constraints import (EXACT, FullSimplex, Frequency, GeneralizedFrequency, Line, Moment, PairConstraintSet,
                          PointSet, Tolerance, Union)
from .core import NType, Pmf, to_fraction
from .errors import ValidationError

LAWS = ("enumerate", "project", "icet", "cwlln", "egcp", "rates", "rcwlln", "rational")
CONSTRAINTS = ("full", "moment", "frequency", "genfreq", "line", "points", "pair")

_LIST_KEYS = {"alphabet", "q", "q2", "u", "a", "base", "direction", "y", "n", "prefix", "nu", "nu_dot", "k"}
_SCALAR_KEYS = {"law", "m", "constraint", "alpha", "b", "epsilon", "tau", "norm", "t", "alpha_entropy",
                "projection", "mode", "format", "budget", "seed", "starts", "points"}
KEYS = _LIST_KEYS | _SCALAR_KEYS


def parse_number(text: str):
    text = text.strip()
    try:
        value = to_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValidationError(f"not a number: {text!r}") from exc
    return int(value) if value.denominator == 1 else value


def parse_schedule(text: str):
    """Comma-separated integers and inclusive ``start:stop:step`` ranges."""
    out = []
    for item in (p.strip() for p in text.split(",")):
        if not item:
            continue
        if ":" not in item:
            out.append(int(parse_number(item)))
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ValidationError(f"schedule range must be start:stop:step, got {item!r}")
        start, stop, step = (int(parse_number(p)) for p in parts)
        if step <= 0:
            raise ValidationError("schedule step must be positive")
        out.extend(range(start, stop + 1, step))
    return out


def parse_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


@dataclass(frozen=True)
class ExperimentConfig:
    law: str
    alphabet: tuple = ()
    q: tuple | str = "uniform"
    q2: tuple | str | None = None
    constraint: str = "full"
    u: tuple = ()
    a: tuple = ()
    alpha: object = None
    b: object = None
    base: tuple = ()
    direction: tuple = ()
    points: tuple = ()
    y: tuple = ()
    n: tuple = ()
    epsilon: float | None = None
    tau: float | None = None
    norm: str = "euclidean"
    prefix: tuple | None = None
    t: int = 1
    alpha_entropy: object = None
    projection: str = "i"
    nu: tuple = ()
    nu_dot: tuple = ()
    k: tuple = ()
    mode: str = "exact"
    format: str = "csv"
    budget: int | None = None
    seed: int = 0
    starts: int | None = None

    # -- construction -----------------------------------------------------
    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_text(text))

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - KEYS
        if unknown:
            raise ValidationError(f"unknown keys: {sorted(unknown)}")
        if "law" not in raw:
            raise ValidationError("missing key 'law'")
        kw = {"law": str(raw["law"]).strip()}

        def nums(key):
            return tuple(parse_number(v) for v in str(raw[key]).split(",") if v.strip())

        def source(key):
            v = str(raw[key]).strip()
            return "uniform" if v == "uniform" else nums(key)

        if "alphabet" in raw:
            kw["alphabet"] = nums("alphabet")
        elif "m" in raw:
            kw["alphabet"] = tuple(range(1, int(parse_number(raw["m"])) + 1))
        for key in ("q", "q2"):
            if key in raw:
                kw[key] = source(key)
        for key in ("u", "a", "base", "direction", "y"):
            if key in raw:
                kw[key] = nums(key)
        for key in ("nu", "nu_dot", "prefix"):
            if key in raw:
                kw[key] = tuple(int(v) for v in nums(key))
        for key in ("n", "k"):
            if key in raw:
                kw[key] = tuple(parse_schedule(raw[key]))
        if "points" in raw:
            rows = [r for r in str(raw["points"]).split(";") if r.strip()]
            kw["points"] = tuple(tuple(int(parse_number(v)) for v in r.split(",")) for r in rows)
        for key in ("alpha", "b", "alpha_entropy"):
            if key in raw:
                kw[key] = parse_number(raw[key])
        for key in ("epsilon", "tau"):
            if key in raw:
                kw[key] = float(parse_number(raw[key]))
        for key in ("t", "budget", "seed", "starts"):
            if key in raw:
                kw[key] = int(parse_number(raw[key]))
        for key in ("constraint", "norm", "projection", "mode", "format"):
            if key in raw:
                kw[key] = str(raw[key]).strip()
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        cfg.validate()
        return cfg

    # -- validation -------------------------------------------------------
    def validate(self):
        if self.law not in LAWS:
            raise ValidationError(f"unknown law {self.law!r}; expected one of {', '.join(LAWS)}")
        if self.constraint not in CONSTRAINTS:
            raise ValidationError(f"unknown constraint {self.constraint!r}")
        if self.mode not in ("exact", "float"):
            raise ValidationError("mode must be exact or float")
        if self.format not in ("csv", "json"):
            raise ValidationError("format must be csv or json")
        if self.norm not in ("euclidean", "max"):
            raise ValidationError("norm must be euclidean or max")
        if self.projection not in ("i", "tau", "mu"):
            raise ValidationError("projection must be i, tau or mu")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if self.tau is not None and not self.tau >= 0:
            raise ValidationError("tau must be nonnegative")
        if self.budget is not None and self.budget <= 0:
            raise ValidationError("budget must be positive")
        if any(n < 1 for n in self.n) or any(k < 1 for k in self.k):
            raise ValidationError("schedules must hold positive integers")
        needs_n = {"enumerate", "icet", "cwlln", "egcp", "rates", "rcwlln"}
        if self.law in needs_n and not self.n:
            raise ValidationError(f"law {self.law!r} needs an n schedule")
        if self.law == "project" and self.projection == "mu" and not self.n:
            raise ValidationError("mu projections need an n schedule")
        if self.law == "rational":
            if not (self.nu and self.nu_dot and self.k):
                raise ValidationError("law 'rational' needs nu, nu_dot and k")
        if self.law == "rcwlln":
            if self.constraint != "pair":
                raise ValidationError("law 'rcwlln' needs constraint = pair")
            if self.epsilon is None:
                raise ValidationError("law 'rcwlln' needs epsilon")
        if self.law == "cwlln" and self.epsilon is None:
            raise ValidationError("law 'cwlln' needs epsilon")
        if self.constraint == "pair" and self.law != "rcwlln":
            raise ValidationError("pair constraints are only used by rcwlln")
        self._check_constraint_keys()

    def _check_constraint_keys(self):
        c = self.constraint
        if c in ("moment", "frequency", "pair") and not self.a:
            raise ValidationError(f"constraint {c!r} needs a")
        if c == "frequency" and (self.alpha is None or len(self.a) != 1):
            raise ValidationError("frequency needs alpha and a single level a")
        if c == "genfreq" and (self.alpha is None or self.b is None):
            raise ValidationError("genfreq needs alpha and b")
        if c == "line" and not (self.base and self.direction):
            raise ValidationError("line needs base and direction")
        if c == "points" and not self.points:
            raise ValidationError("points constraint needs points")
        if c == "pair" and len(self.a) != 1:
            raise ValidationError("pair constraint needs a single level a")

    # -- derived objects --------------------------------------------------
    @property
    def m(self) -> int:
        if self.alphabet:
            return len(self.alphabet)
        for v in (self.q if self.q != "uniform" else (), self.base, self.u, self.nu):
            if v:
                return len(v)
        if self.points:
            return len(self.points[0])
        raise ValidationError("cannot infer alphabet size; give alphabet or m")

    @property
    def values(self) -> tuple:
        return self.alphabet or tuple(range(1, self.m + 1))

    def source(self, which="q") -> Pmf:
        v = getattr(self, which)
        size = len(self.y) if which == "q2" and self.y else self.m
        if v is None:
            v = "uniform"
        return Pmf.uniform(size) if v == "uniform" else Pmf.of([Fraction(x) for x in v])

    @property
    def membership(self):
        return EXACT if self.tau is None else Tolerance(self.tau)

    @property
    def exact_weights(self):
        return None if self.mode == "exact" else False

    def build_constraint(self):
        c = self.constraint
        if c == "full":
            return FullSimplex(self.m)
        if c == "moment":
            u = self.u or self.values
            members = [Moment(u, a) for a in self.a]
            return members[0] if len(members) == 1 else Union(members)
        if c == "frequency":
            return Frequency(self.alpha, self.a[0], m=self.m)
        if c == "genfreq":
            return GeneralizedFrequency(self.alpha, self.b, self.values)
        if c == "line":
            return Line(tuple(float(v) for v in self.base), tuple(float(v) for v in self.direction))
        if c == "points":
            return PointSet([NType(p) for p in self.points])
        if c == "pair":
            return PairConstraintSet(self.values, self.y or self.values, self.a[0])
        raise ValidationError(f"unknown constraint {c!r}")
