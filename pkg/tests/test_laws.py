import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from typelaws import (EXACT, Ball, FullSimplex, Moment, NType, PairConstraintSet, PointSet, Pmf, Tolerance,
                      all_types, conditional_ball_probability, cwlln_experiment, egcp_experiment,
                      egcp_prefix_probability, i_divergence, i_projections, icet_experiment, rational_concentration,
                      rcwlln_experiment, sanov_rate, type_distribution, type_probability)
from typelaws.errors import BallOverlap, EmptyFeasibleSet, PrefixTooLong, PreconditionViolated, ValidationError
from typelaws.laws import closest_types_radius, prefix_given_type

from conftest import brute_sequences


def oracle_conditional(n, constraint, q, select, mode=EXACT):
    feas = [t for t in all_types(n, q.m) if constraint.contains(t, mode)]
    total = sum(type_probability(t, q).exact for t in feas)
    part = sum(type_probability(t, q).exact for t in feas if select(t))
    return part / total


# --- conditional ball probability -------------------------------------------

def test_ex1_eps2_exactly_one_third(q3, freq_set, freq_proj):
    for eps in (math.sqrt(0.0532) + 1e-6, 0.29, 0.35):
        value = conditional_ball_probability(30, freq_set, EXACT, Ball(freq_proj.points[0], eps), q3)
        assert value == Fraction(1, 3)


def test_ex1_nearest_types_oracle(q3, freq_set, freq_proj):
    center = freq_proj.points[0]
    types = type_distribution(30, freq_set, EXACT, q3).types
    assert sum(Ball(center, 0.2).contains(t) for t in types) == 2
    assert sum(Ball(center, 0.29).contains(t) for t in types) == 4
    eps1 = closest_types_radius(type_distribution(30, freq_set, EXACT, q3).types, center.array)
    value = conditional_ball_probability(30, freq_set, EXACT, Ball(center, eps1), q3)
    want = oracle_conditional(30, freq_set, q3, Ball(center, eps1).contains)
    assert value == want
    # 2 Gamma_1 / (6 Gamma_1 + 6 Gamma_2)
    g1 = math.factorial(30) // (math.factorial(17) * math.factorial(8) * math.factorial(5))
    g2 = math.factorial(30) // (math.factorial(15) * math.factorial(12) * math.factorial(3))
    assert value == Fraction(2 * g1, 6 * g1 + 6 * g2)
    assert abs(float(value) - 0.2287) < 1e-4


def test_ball_covering_everything(q3, freq_set, freq_proj):
    assert conditional_ball_probability(30, freq_set, EXACT, Ball(freq_proj.points[0], 2.0), q3) == 1


def test_empty_set_raises(q3):
    with pytest.raises(EmptyFeasibleSet):
        conditional_ball_probability(15, PointSet([(4, 3, 3), (6, 3, 1)]), EXACT, Ball((0.4, 0.3, 0.3), 0.1), q3)


def test_ball_validation():
    with pytest.raises(ValidationError):
        Ball((0.5, 0.5), 0)
    with pytest.raises(ValidationError):
        Ball((0.5, 0.5), 1, norm="l1")
    b = Ball((0.5, 0.5), 0.1, norm="max")
    assert b.contains(NType((11, 9))) and not b.contains(NType((7, 3)))


def test_float_weights_agree_with_exact(q3, freq_set, freq_proj):
    ball = Ball(freq_proj.points[0], 0.2)
    exact = conditional_ball_probability(60, freq_set, EXACT, ball, q3)
    approx = conditional_ball_probability(60, freq_set, EXACT, ball, q3, exact=False)
    assert isinstance(approx, float)
    assert abs(float(exact) - approx) < 1e-12


def test_nonuniform_source_oracle():
    q = Pmf.of([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
    s = Moment([1, 2, 3], Fraction(9, 5))
    p_hat = i_projections(q, s).points[0]
    ball = Ball(p_hat, 0.1)
    assert conditional_ball_probability(20, s, EXACT, ball, q) == oracle_conditional(20, s, q, ball.contains)


def test_partition_sums_to_one(q3, freq_set, freq_proj):
    dist = type_distribution(30, freq_set, EXACT, q3)
    balls = [Ball(p, 0.29) for p in freq_proj.points]
    parts = [dist.probability(b.contains) for b in balls]
    rest = dist.probability(lambda t: not any(b.contains(t) for b in balls))
    assert sum(parts) + rest == 1


# --- ICET / CWLLN ---------------------------------------------------------------

def test_icet_ex1_values(q3, freq_set, freq_proj):
    recs = icet_experiment(freq_set, q3, [30], projections=freq_proj)
    assert [r.j for r in recs] == [1, 2, 3]
    assert len({r.value for r in recs}) == 1
    assert abs(float(recs[0].value) - 0.2304) <= 0.01
    tol = icet_experiment(freq_set, q3, [330], mode=Tolerance(1e-4), projections=freq_proj)
    assert abs(float(tol[0].value) - 0.261) <= 0.01
    assert tol[0].value > recs[0].value


def test_icet_empty_flagged(q3, two_mcc):
    recs = icet_experiment(two_mcc, q3, [7, 9], epsilon=0.35)
    assert len(recs) == 4 and all(r.empty and r.value is None for r in recs)


def test_icet_needs_a_proper_projection(q3):
    with pytest.raises(ValidationError):
        icet_experiment(PointSet([(4, 3, 3), (6, 3, 1)]), q3, [10], epsilon=0.01)


def test_icet_overlap_detected(q3, freq_set, freq_proj):
    with pytest.raises(BallOverlap):
        icet_experiment(freq_set, q3, [30], epsilon=0.6, projections=freq_proj)


def test_ex2_half(q3, two_mcc):
    recs = icet_experiment(two_mcc, q3, [2, 7, 20, 64], epsilon=0.35)
    for r in recs:
        if r.n == 7:
            assert r.empty
        else:
            assert r.value == Fraction(1, 2)


def test_cwlln_convex_case(q3):
    s = Moment([1, 2, 3], Fraction(5, 2))
    recs = cwlln_experiment(s, q3, [20, 50, 100, 200], 0.1)
    vals = [float(r.value) for r in recs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.99
    with pytest.raises(ValidationError):
        cwlln_experiment(PointSet([(1, 1), (2, 0)]), Pmf.uniform(2), [2], 0.1)


# --- urn prefixes -------------------------------------------------------------------

@pytest.mark.parametrize("counts", [(2, 1, 1), (3, 0, 2), (1, 1, 1)])
def test_prefix_given_type_matches_sequences(counts):
    nu = NType(counts)
    seqs = [s for s, c in brute_sequences(nu.n, nu.m) if c == counts]
    for t in range(0, 3):
        for prefix in itertools.product(range(3), repeat=t):
            want = Fraction(sum(1 for s in seqs if s[:t] == prefix), len(seqs))
            assert prefix_given_type(nu, prefix) == want


def test_prefix_sum_to_one(q3, two_mcc):
    for n in (6, 30, 60):
        for t in (1, 2, 3):
            total = sum(egcp_prefix_probability(n, two_mcc, EXACT, q3, pre)
                        for pre in itertools.product(range(3), repeat=t))
            assert total == 1


def test_prefix_trivial_cases(q3):
    s = PointSet([(4, 3, 3)])
    assert egcp_prefix_probability(10, s, EXACT, q3, ()) == 1
    assert egcp_prefix_probability(10, s, EXACT, q3, (0,)) == Fraction(4, 10)
    with pytest.raises(PrefixTooLong):
        egcp_prefix_probability(2, FullSimplex(3), EXACT, q3, (0, 1, 2))
    with pytest.raises(EmptyFeasibleSet):
        egcp_prefix_probability(15, s, EXACT, q3, (0,))


def test_egcp_ex2_mixture(q3, two_mcc):
    recs = egcp_experiment(two_mcc, q3, [40, 80, 160], t=1)
    gaps = [max(float(r.abs_error) for r in recs if r.n == n) for n in (40, 80, 160)]
    assert gaps[-1] <= 0.02 and gaps[0] > gaps[1] > gaps[2]
    recs2 = egcp_experiment(two_mcc, q3, [40, 80, 160], t=2)
    gaps2 = [max(float(r.abs_error) for r in recs2 if r.n == n) for n in (40, 80, 160)]
    assert gaps2[0] > gaps2[1] > gaps2[2]


def test_gcp_single_mcc(q3):
    s = Moment([1, 2, 3], Fraction(5, 2))
    recs = egcp_experiment(s, q3, [200], t=1)
    assert max(float(r.abs_error) for r in recs) <= 0.02


# --- Sanov rates -------------------------------------------------------------------------

def test_rate_full_simplex(q3):
    for r in sanov_rate([5, 10, 40], FullSimplex(3), EXACT, q3):
        assert abs(r.value) < 1e-12 and r.reference == 0


def test_rate_brackets_and_reference(q3):
    s = Moment([1, 2, 3], Fraction(5, 2))
    p_hat = i_projections(q3, s).points[0]
    recs = sanov_rate(list(range(10, 301, 10)), s, EXACT, q3)
    for r in recs:
        assert r.reference == pytest.approx(-i_divergence(p_hat, q3))
        assert r.detail["lower"] < r.value <= r.detail["upper"]
        assert r.detail["st_lower"] < r.value <= r.detail["st_upper"]
        assert abs(r.value - r.reference) <= 3 * math.log(r.n + 1) / r.n + 0.01
    gaps = [abs(r.value - r.reference) for r in recs]
    assert gaps[-1] < gaps[0]


def test_rate_ex1(q3, freq_set, freq_proj):
    r30, r330 = sanov_rate([30, 330], freq_set, Tolerance(1e-4), q3, projections=freq_proj)
    assert abs(r330.value - r330.reference) <= 0.15
    assert abs(r330.value - r330.reference) < abs(r30.value - r30.reference)


def test_rate_empty_flagged(q3):
    recs = sanov_rate([15, 20], PointSet([(4, 3, 3), (6, 3, 1)]), EXACT, q3)
    assert recs[0].empty and not recs[1].empty


# --- pairs ---------------------------------------------------------------------------------

def test_rcwlln_oracle_small(q3):
    ps = PairConstraintSet([1, 2, 3], [1, 2, 3], 4)
    n = 9
    center = np.full(6, 1 / 3)
    feas = [(a, b) for a in all_types(n, 3) for b in all_types(n, 3) if ps.contains(a, b)]
    w = {pr: type_probability(pr[0], q3).exact * type_probability(pr[1], q3).exact for pr in feas}
    inside = [pr for pr in feas if np.linalg.norm(np.concatenate([pr[0].array, pr[1].array]) - center) < 0.3]
    want = sum(w[p] for p in inside) / sum(w.values())
    assert rcwlln_experiment(q3, q3, ps, [n], 0.3)[0].value == want


def test_rcwlln_gjmip(q3):
    ps = PairConstraintSet([1, 2, 3], [1, 2, 3], 4)
    vals = [float(r.value) for r in rcwlln_experiment(q3, q3, ps, [20, 40], 0.15)]
    assert vals[0] < vals[1]
    assert rcwlln_experiment(q3, q3, ps, [10], 3.0)[0].value == 1


def test_rcwlln_infeasible(q3):
    ps = PairConstraintSet([1, 2, 3], [1, 2, 3], Fraction(41, 10))
    with pytest.raises(EmptyFeasibleSet):
        rcwlln_experiment(q3, q3, ps, [3, 7], 0.1)


# --- rational concentration ---------------------------------------------------------------

def test_rational_preset_certified(q3):
    res = rational_concentration(NType((4, 3, 3)), NType((6, 3, 1)), q3, range(1, 21))
    assert res.gamma == Fraction(9, 16) and res.certified
    ratios = [r.value for r in res.records]
    assert ratios[0] == Fraction(1, 5)
    assert all(r.value <= r.reference for r in res.records)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_rational_ratio_big_integer_oracle():
    q = Pmf.uniform(2)
    res = rational_concentration(NType((2, 2)), NType((3, 1)), q, range(1, 11))
    f = math.factorial
    for r in res.records:
        k = r.j
        assert r.value == Fraction(f(2 * k) * f(2 * k), f(3 * k) * f(k))
    # gamma = 1 is not a certificate here; the decay is still geometric
    assert res.gamma == 1 and not res.certified
    steps = [float(b.value / a.value) for a, b in zip(res.records, res.records[1:])]
    assert all(s < 1 for s in steps)
    assert abs(steps[-1] - 16 / 27) < 0.02


def test_rational_matches_engine_mass(q3):
    s = PointSet([(4, 3, 3), (6, 3, 1)])
    res = rational_concentration(NType((4, 3, 3)), NType((6, 3, 1)), q3, [1, 3, 7])
    for r in res.records:
        dist = type_distribution(r.n, s, EXACT, q3)
        mass = dist.probability(lambda t: t == NType((6, 3, 1)).scaled(r.j))
        assert mass == r.detail["mass_less_probable"]


def test_rational_preconditions(q3):
    with pytest.raises(PreconditionViolated):
        rational_concentration(NType((4, 3, 3)), NType((4, 3, 3)), q3, [1])
    with pytest.raises(PreconditionViolated):
        rational_concentration(NType((6, 3, 1)), NType((4, 3, 3)), q3, [1])
    with pytest.raises(PreconditionViolated):
        rational_concentration(NType((4, 3, 3)), NType((5, 5)), q3, [1])


@pytest.mark.parametrize("mode", [EXACT, Tolerance(1e-4)])
def test_icet_fixed_radius_trend(q3, freq_set, freq_proj, mode):
    eps = closest_types_radius(type_distribution(30, freq_set, EXACT, q3).types, freq_proj.points[0].array)
    recs = icet_experiment(freq_set, q3, list(range(30, 331, 30)), epsilon=eps, mode=mode, projections=freq_proj)
    by_n = {}
    for r in recs:
        by_n.setdefault(r.n, []).append(r.value)
    assert all(len(set(v)) == 1 for v in by_n.values())
    j1 = [float(v[0]) for _, v in sorted(by_n.items())]
    assert all(b >= a - 5e-3 for a, b in zip(j1, j1[1:]))
    assert abs(j1[-1] - 1 / 3) < 1e-3


def test_nearest_radius_dips_at_new_orbits(q3, freq_set, freq_proj):
    # at n=210 new near-feasible orbits appear closer to the projection
    recs = icet_experiment(freq_set, q3, [180, 210], projections=freq_proj)
    v180, v210 = (float(r.value) for r in recs if r.j == 1)
    assert v210 < v180 - 0.1


def test_workers_do_not_change_results(q3, freq_set, freq_proj, monkeypatch):
    ns = [30, 60, 90, 120]
    monkeypatch.setenv("TYPELAWS_WORKERS", "1")
    a = icet_experiment(freq_set, q3, ns, projections=freq_proj)
    monkeypatch.setenv("TYPELAWS_WORKERS", "4")
    b = icet_experiment(freq_set, q3, ns, projections=freq_proj)
    assert a == b
