import math
from fractions import Fraction

import pytest

from typelaws import Frequency, Moment, Pmf, Union, i_projections


@pytest.fixture(scope="session")
def q3():
    return Pmf.uniform(3)


@pytest.fixture(scope="session")
def freq_set():
    return Frequency(2, Fraction(42, 100))


@pytest.fixture(scope="session")
def freq_proj(q3, freq_set):
    return i_projections(q3, freq_set)


@pytest.fixture(scope="session")
def two_mcc():
    x = [1, 2, 3]
    return Union([Moment(x, Fraction(5, 2)), Moment(x, Fraction(3, 2))])


def brute_sequences(n, m):
    """All length-n sequences over m symbols as count tuples (with repeats)."""
    import itertools

    for seq in itertools.product(range(m), repeat=n):
        counts = [0] * m
        for s in seq:
            counts[s] += 1
        yield seq, tuple(counts)


def log_close(a, b, rel=1e-10):
    return abs(a - b) <= rel * max(1.0, abs(b))


# --- acceptance verdicts ---------------------------------------------------------

VERDICTS = {}


def verdict(number, name, passed, detail=""):
    """Record one acceptance line and fail the calling test if it did not pass."""
    VERDICTS[number] = (name, bool(passed), detail)
    assert passed, f"criterion {number} ({name}) failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        name, passed, detail = VERDICTS[number]
        line = f"{'PASS' if passed else 'FAIL'} {number:2d} {name}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
