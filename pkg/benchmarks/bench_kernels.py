"""Compare the numba and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends run in one process through the ``use_numba`` switch, so the
environment flag is not needed here.  Results are checked for equality before
timings are reported.  Times are the best of ``--repeat`` runs after a warm-up
call (numba compile time is excluded).
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from typelaws import Frequency, FullSimplex, Moment, Tolerance, EXACT, enumerate_types
from typelaws._accel import HAVE_NUMBA
from typelaws.kernels import enumerate_feasible, log_multinomial


def enum_case(n, constraint, mode, m=None):
    return lambda use: enumerate_types(n, constraint, mode, m=m, budget=10 ** 9, use_numba=use)


def logmult_case(rows, m, n, seed=0):
    counts = np.random.default_rng(seed).multinomial(n, np.ones(m) / m, size=rows)
    return lambda use: log_multinomial(counts, use_numba=use)


def raw_case(n, m):
    return lambda use: enumerate_feasible(np.zeros((0, m, n + 1)), [], [], n, use_numba=use)


CASES = [
    ("freq a=0.42 n=330 exact", enum_case(330, Frequency(2, Fraction(42, 100)), EXACT, 3)),
    ("freq a=0.42 n=330 tau=1e-4", enum_case(330, Frequency(2, Fraction(42, 100)), Tolerance(1e-4), 3)),
    ("moment a=2.5 m=3 n=600", enum_case(600, Moment([1, 2, 3], Fraction(5, 2)), EXACT)),
    ("moment a=3 m=5 n=60", enum_case(60, Moment([1, 2, 3, 4, 5], 3), EXACT)),
    ("full simplex m=4 n=80", enum_case(80, FullSimplex(4), EXACT)),
    ("raw compositions m=4 n=80", raw_case(80, 4)),
    ("log multinomial 10^6 x 4", logmult_case(10 ** 6, 4, 200)),
]


def best(fn, use, repeat):
    fn(use)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(use)
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.allclose(a, b, rtol=1e-12, atol=0)
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'case':32s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}  size")
    for name, fn in CASES:
        t_np, out_np = best(fn, False, args.repeat)
        t_nb, out_nb = best(fn, True, args.repeat)
        if not same(out_np, out_nb):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:32s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.1f}x  {len(out_np)}")


if __name__ == "__main__":
    main()
