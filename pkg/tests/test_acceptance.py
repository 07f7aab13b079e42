"""Acceptance criteria, one test each.  A PASS/FAIL line per criterion is
printed in the terminal summary."""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from typelaws import (EXACT, Ball, Frequency, Moment, NType, Pmf, Tolerance, Union, all_types,
                      conditional_ball_probability, egcp_experiment, egcp_prefix_probability, enumerate_types,
                      i_divergence, i_projections, icet_experiment, maxprob_lhs_bounds, mu_projection,
                      probability_ratio_bound, rational_concentration, sanov_rate, tau_projection,
                      type_distribution, type_probability)
from typelaws.cli import main
from typelaws.constraints import Line
from typelaws.core import log_fraction
from typelaws.laws import closest_types_radius
from typelaws.presets import PRESETS, config

from conftest import verdict

Q3 = Pmf.uniform(3)
EX1 = Frequency(2, Fraction(42, 100))
EX1_POINT = (0.5737, 0.2131, 0.2131)
EX2 = Union([Moment([1, 2, 3], Fraction(5, 2)), Moment([1, 2, 3], Fraction(3, 2))])


@pytest.fixture(scope="module")
def ex1_proj():
    return i_projections(Q3, EX1)


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    enumerate_types(12, EX1, EXACT, m=3)
    enumerate_types(12, EX1, Tolerance(1e-4), m=3)


def orbit(t):
    return tuple(sorted(t.counts, reverse=True))


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_01_enumeration_exact():
    types, secs = timed(lambda: enumerate_types(30, EX1, EXACT, m=3))
    orbits = sorted({orbit(t) for t in types})
    ok = len(types) == 12 and orbits == [(15, 12, 3), (17, 8, 5)] and secs < 1
    verdict(1, "example1 exact n=30: 12 types in orbits [17,8,5], [15,12,3]", ok,
            f"{len(types)} types, orbits {orbits}, {secs:.3f}s")


def test_02_enumeration_tolerance():
    types, secs = timed(lambda: enumerate_types(330, EX1, Tolerance(1e-4), m=3))
    orbits = {orbit(t) for t in types}
    sizes = sorted(sum(orbit(t) == o for t in types) for o in orbits)
    ok = len(types) == 24 and len(orbits) == 4 and secs < 5
    verdict(2, "example1 tau=1e-4 n=330: 24 types in four orbits", ok,
            f"{len(types)} types, orbit sizes {sizes}, {secs:.3f}s")


def test_03_i_projections(ex1_proj):
    pts = ex1_proj.arrays()
    perms = {tuple(EX1_POINT[i] for i in p) for p in itertools.permutations(range(3))}
    errs = [min(float(np.max(np.abs(p - np.array(t)))) for t in perms) for p in pts]
    hit = {min(perms, key=lambda t: float(np.max(np.abs(p - np.array(t))))) for p in pts}
    objs = [i_divergence(p, Q3) for p in pts]
    spread = max(objs) - min(objs)
    ok = len(pts) == 3 and len(hit) == 3 and max(errs) <= 5e-4 and spread <= 1e-9
    verdict(3, "example1 three I-projections", ok, f"k={len(pts)}, max error {max(errs):.2e}, spread {spread:.1e}")


def test_04_eps2_one_third(ex1_proj):
    lo, hi = math.sqrt(0.0532), math.sqrt(0.1253)
    values = {}
    for eps in (lo + 1e-6, (lo + hi) / 2, 0.3, hi - 1e-3):
        values[eps] = conditional_ball_probability(30, EX1, EXACT, Ball(ex1_proj.points[0], eps), Q3)
    ok = all(v == Fraction(1, 3) for v in values.values())
    verdict(4, "example1 eps2 ball probability exactly 1/3", ok, ", ".join(f"{e:.4f}:{v}" for e, v in values.items()))


def test_05_nearest_types(ex1_proj):
    v30 = icet_experiment(EX1, Q3, [30], None, EXACT, ex1_proj)[0].value
    v330 = icet_experiment(EX1, Q3, [330], None, Tolerance(1e-4), ex1_proj)[0].value
    g1 = math.factorial(30) // (math.factorial(17) * math.factorial(8) * math.factorial(5))
    g2 = math.factorial(30) // (math.factorial(15) * math.factorial(12) * math.factorial(3))
    oracle = Fraction(2 * g1, 6 * g1 + 6 * g2)
    ok = (abs(float(v30) - 0.2304) <= 0.01 and abs(float(v330) - 0.261) <= 0.01 and v330 > v30
          and abs(float(v30) - 0.2287) <= 1e-4 and abs(float(v30) - float(oracle)) <= 1e-12)
    verdict(5, "example1 nearest-types ball n=30 and n=330", ok,
            f"n=30 {float(v30):.6f} (oracle {float(oracle):.6f}), n=330 {float(v330):.6f}")


def test_06_icet_trend(ex1_proj):
    # fixed ball: radius that just isolates the nearest types at n=30
    eps = closest_types_radius(type_distribution(30, EX1, EXACT, Q3).types, ex1_proj.points[0].array)
    ns = list(range(30, 331, 30))
    recs = icet_experiment(EX1, Q3, ns, eps, EXACT, ex1_proj)
    by_n = {n: [r.value for r in recs if r.n == n] for n in ns}
    equal = all(len(v) == 3 and len(set(v)) == 1 for v in by_n.values())
    j1 = [float(by_n[n][0]) for n in ns]
    trend = all(b >= a - 5e-3 for a, b in zip(j1, j1[1:]))
    ok = equal and trend and abs(j1[-1] - 1 / 3) <= 0.08
    verdict(6, "example1 ICET trend to 1/3, equal j-values", ok,
            f"eps={eps:.6f}, j=1: " + " ".join(f"{v:.4f}" for v in j1))


def test_07_ex2_one_half():
    recs = icet_experiment(EX2, Q3, list(range(1, 201)), 0.35, EXACT)
    filled = [r for r in recs if not r.empty]
    nonempty = sorted({r.n for r in filled})
    ok = bool(filled) and all(r.value == Fraction(1, 2) for r in filled) and len({r.j for r in filled}) == 2
    verdict(7, "example2 ball probabilities exactly 1/2", ok, f"{len(nonempty)} nonempty n in 1..200")


def test_08_maxtent_gap():
    cfg = config("maxtent")
    line = cfg.build_constraint()
    assert isinstance(line, Line)
    a = i_projections(Q3, line).arrays()[0]
    b = tau_projection(Q3, line, 2).arrays()[0]
    ea = float(np.max(np.abs(a - np.array([0.2748, 0.3366, 0.3886]))))
    eb = float(np.max(np.abs(b - np.array([0.2735, 0.3398, 0.3867]))))
    gap = float(np.linalg.norm(a - b))
    ok = ea <= 5e-4 and eb <= 5e-4 and gap > 2e-3
    verdict(8, "maxtent I-projection vs Tsallis alpha=2", ok, f"errors {ea:.1e}, {eb:.1e}; distance {gap:.5f}")


def test_09_egcp():
    recs = egcp_experiment(EX2, Q3, [40, 80, 160], 1, EXACT)
    gaps = [max(float(r.abs_error) for r in recs if r.n == n) for n in (40, 80, 160)]
    sums = {}
    for n in (20, 40, 60):
        for t in (1, 2, 3):
            sums[(n, t)] = sum(egcp_prefix_probability(n, EX2, EXACT, Q3, p)
                               for p in itertools.product(range(3), repeat=t))
    ok = gaps[-1] <= 0.02 and all(b < a for a, b in zip(gaps, gaps[1:])) and all(s == 1 for s in sums.values())
    verdict(9, "EGCP gap shrinks, prefix probabilities sum to 1", ok,
            "gaps " + " ".join(f"{g:.5f}" for g in gaps) + f"; exact sums {sum(s == 1 for s in sums.values())}/9")


def test_10_sanov_rate():
    s = Moment([1, 2, 3], Fraction(5, 2))
    recs = [r for r in sanov_rate(list(range(10, 301, 10)), s, EXACT, Q3) if not r.empty]
    slack = [3 * math.log(r.n + 1) / r.n + 0.01 - abs(r.value - r.reference) for r in recs]
    ok = len(recs) == 30 and min(slack) > 0
    verdict(10, "Sanov rate within m ln(n+1)/n + 0.01", ok, f"{len(recs)} n values, minimum slack {min(slack):.4f}")


def _random_type(rng, n, m):
    cuts = np.sort(rng.integers(0, n + 1, m - 1))
    return NType(tuple(np.diff(np.r_[0, cuts, n]).tolist()))


def _factorial_ratio(a, b):
    out = Fraction(1)
    for x, y in zip(a.counts, b.counts):
        out *= Fraction(math.factorial(x), math.factorial(y))
    return out


def test_11_ratio_lemma_and_bounds():
    # (1): pi(b) >= pi(a) iff prod a_i!/b_i! >= prod q_i^(a_i - b_i); (2): strict bracket on that LHS
    rng = np.random.default_rng(0)
    failures = {"lemma": 0, "condition": 0, "bracket": 0}
    for _ in range(1000):
        m = int(rng.choice([2, 3, 4]))
        n = int(rng.integers(7, 101))
        a, b = _random_type(rng, n, m), _random_type(rng, n, m)
        q = Pmf.of([Fraction(i, m * (m + 1) // 2) for i in range(1, m + 1)])
        pa, pb = type_probability(a, q).exact, type_probability(b, q).exact
        if not pa / pb < probability_ratio_bound(a, b, q).exact:
            failures["lemma"] += 1
        rhs = math.prod((Fraction(qi) ** (x - y) for qi, x, y in zip(q.probs, a.counts, b.counts)), start=Fraction(1))
        if (pb >= pa) != (_factorial_ratio(a, b) >= rhs):
            failures["condition"] += 1
        lower, lhs, upper = maxprob_lhs_bounds(a, b)
        if not lower < lhs < upper:
            failures["bracket"] += 1
    verdict(11, "probability-ratio Lemma and MaxProb bounds on 1000 random pairs", not any(failures.values()),
            ", ".join(f"{k} failures {v}" for k, v in failures.items()))


def test_12_maxprob_maxent(ex1_proj):
    pts = ex1_proj.arrays()

    def worst(n, mode):
        mu = mu_projection(Q3, n, EX1, mode)
        return max(min(float(np.linalg.norm(p - x)) for x in pts) for p in mu.arrays())

    d30, d330 = worst(30, EXACT), worst(330, Tolerance(1e-4))
    ok = d330 <= 0.05 and d330 <= d30
    verdict(12, "mu-projections approach I-projections", ok, f"n=30 {d30:.4f}, n=330 (tau=1e-4) {d330:.4f}")


def test_13_rational_concentration():
    res = rational_concentration(NType((4, 3, 3)), NType((6, 3, 1)), Q3, range(1, 21))
    r = [rec.value for rec in res.records]
    ok = (res.certified and res.gamma < 1 and len(r) == 20 and all(rec.value <= rec.reference for rec in res.records)
          and all(y < x for x, y in zip(r, r[1:])))
    verdict(13, "rational concentration r_k <= gamma^k, strictly decreasing", ok,
            f"gamma={res.gamma}, r_1={r[0]}, r_20={float(r[-1]):.3e}")


def test_14_normalization():
    sources = {2: [Pmf.uniform(2), Pmf.of([Fraction(1, 3), Fraction(2, 3)])],
               3: [Pmf.uniform(3), Pmf.of([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])],
               4: [Pmf.uniform(4), Pmf.of([Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10)])]}
    bad = 0
    for m, qs in sources.items():
        for q in qs:
            for n in range(1, 21):
                if sum(type_probability(t, q).exact for t in all_types(n, m)) != 1:
                    bad += 1
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(400):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(1, 201))
        q = sources[m][int(rng.integers(0, 2))]
        t = _random_type(rng, n, m)
        ref = log_fraction(type_probability(t, q, exact=True).exact)
        got = type_probability(t, q, exact=False).log
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    ok = bad == 0 and worst <= 1e-10
    verdict(14, "type probabilities sum to 1; log path matches exact", ok,
            f"{bad} inexact sums, worst log relative error {worst:.1e}")


def _reproduce_bytes(preset, tmp_path, capsys, tag):
    out = tmp_path / f"{preset}-{tag}.json"
    assert main(["reproduce", preset, "--out", str(out), "--format", "json"]) == 0
    return capsys.readouterr().out.encode(), out.read_bytes()


def test_15_determinism(tmp_path, capsys, monkeypatch):
    differ = []
    for preset in PRESETS:
        monkeypatch.setenv("TYPELAWS_WORKERS", "1")
        first = _reproduce_bytes(preset, tmp_path, capsys, "a")
        second = _reproduce_bytes(preset, tmp_path, capsys, "b")
        monkeypatch.setenv("TYPELAWS_WORKERS", "4")
        third = _reproduce_bytes(preset, tmp_path, capsys, "c")
        if not first == second == third:
            differ.append(preset)
    verdict(15, "reproduce presets byte-identical across runs and workers 1, 4", not differ,
            f"{len(PRESETS)} presets" + (f", differing: {differ}" if differ else ""))
