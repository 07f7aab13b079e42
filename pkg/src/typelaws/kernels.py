"""Hot loops: constrained composition enumeration and batched log-multinomials.

Every separable constraint row is encoded as a lookup table ``table[r, i, k]``,
the contribution of symbol ``i`` holding ``k`` occurrences to row ``r``.  A
count vector is feasible when ``|sum_i table[r, i, n_i] - target[r]| <= tol[r]``
for every row.  Suffix min/max tables (an O(m n^2) dynamic program) give exact
reachable ranges for any partial assignment, so the depth-first search only
descends into subtrees that contain at least one feasible completion.

Two interchangeable backends exist: a numba-compiled DFS and a level-wise
pure-numpy expansion.  ``TYPELAWS_DISABLE_NUMBA=1`` selects the latter.  Object
dtype tables (Python ints too wide for int64) always go through numpy.
"""
import math

import numpy as np
from scipy.special import gammaln

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# suffix range tables

def suffix_bounds_numpy(tables):
    """Return ``(lo, hi)`` with ``lo[r, i, R]`` the minimum of
    ``sum_{j >= i} table[r, j, k_j]`` over compositions of ``R`` into symbols
    ``i..m-1`` (``hi`` the maximum)."""
    R, m, np1 = tables.shape
    lo = np.empty_like(tables)
    hi = np.empty_like(tables)
    lo[:, m - 1, :] = tables[:, m - 1, :]
    hi[:, m - 1, :] = tables[:, m - 1, :]
    for i in range(m - 2, -1, -1):
        for rem in range(np1):
            # k occurrences here, rem - k for the suffix
            cand = tables[:, i, : rem + 1] + lo[:, i + 1, rem::-1]
            lo[:, i, rem] = cand.min(axis=1)
            cand = tables[:, i, : rem + 1] + hi[:, i + 1, rem::-1]
            hi[:, i, rem] = cand.max(axis=1)
    return lo, hi


@njit
def suffix_bounds_numba(tables):
    R, m, np1 = tables.shape
    lo = np.empty_like(tables)
    hi = np.empty_like(tables)
    for r in range(R):
        for rem in range(np1):
            lo[r, m - 1, rem] = tables[r, m - 1, rem]
            hi[r, m - 1, rem] = tables[r, m - 1, rem]
        for i in range(m - 2, -1, -1):
            for rem in range(np1):
                best_lo = tables[r, i, 0] + lo[r, i + 1, rem]
                best_hi = tables[r, i, 0] + hi[r, i + 1, rem]
                for k in range(1, rem + 1):
                    v = tables[r, i, k] + lo[r, i + 1, rem - k]
                    if v < best_lo:
                        best_lo = v
                    v = tables[r, i, k] + hi[r, i + 1, rem - k]
                    if v > best_hi:
                        best_hi = v
                lo[r, i, rem] = best_lo
                hi[r, i, rem] = best_hi
    return lo, hi


# ---------------------------------------------------------------------------
# enumeration

@njit
def enumerate_numba(tables, lo, hi, target, tol, slack, n):
    R, m, _ = tables.shape
    cap = 1024
    out = np.empty((cap, m), dtype=np.int64)
    count = 0
    counts = np.zeros(m, dtype=np.int64)
    rem = np.zeros(m, dtype=np.int64)
    part = np.zeros((m, R), dtype=tables.dtype)
    rem[0] = n
    i = 0
    counts[0] = -1
    while i >= 0:
        counts[i] += 1
        if counts[i] > rem[i]:
            i -= 1
            continue
        k = counts[i]
        left = rem[i] - k
        if i == m - 2:
            ok = True
            for r in range(R):
                v = part[i, r] + tables[r, i, k] + tables[r, m - 1, left]
                if abs(v - target[r]) > tol[r]:
                    ok = False
                    break
            if ok:
                if count == cap:
                    grown = np.empty((2 * cap, m), dtype=np.int64)
                    grown[:cap] = out
                    out = grown
                    cap *= 2
                for j in range(m - 1):
                    out[count, j] = counts[j]
                out[count, m - 1] = left
                count += 1
            continue
        viable = True
        for r in range(R):
            base = part[i, r] + tables[r, i, k]
            if base + lo[r, i + 1, left] > target[r] + tol[r] + slack[r]:
                viable = False
                break
            if base + hi[r, i + 1, left] < target[r] - tol[r] - slack[r]:
                viable = False
                break
        if not viable:
            continue
        for r in range(R):
            part[i + 1, r] = part[i, r] + tables[r, i, k]
        rem[i + 1] = left
        i += 1
        counts[i] = -1
    return out[:count].copy()


def enumerate_numpy(tables, lo, hi, target, tol, slack, n):
    """Level-wise vectorized version of :func:`enumerate_numba`.

    Rows stay in lexicographic order because each prefix is expanded in place
    with ascending next counts.
    """
    R, m, _ = tables.shape
    prefix = np.zeros((1, 0), dtype=np.int64)
    part = np.zeros((1, R), dtype=tables.dtype)
    left = np.array([n], dtype=np.int64)
    for i in range(m - 1):
        reps = left + 1
        idx = np.repeat(np.arange(len(left)), reps)
        if len(idx) == 0:
            break
        starts = np.cumsum(reps) - reps
        k = np.arange(len(idx), dtype=np.int64) - np.repeat(starts, reps)
        new_left = left[idx] - k
        contrib = tables[:, i, :][:, k].T  # (rows, R)
        new_part = part[idx] + contrib
        if i == m - 2:
            last = tables[:, m - 1, :][:, new_left].T
            total = new_part + last
            keep = np.all(np.abs(total - target[None, :]) <= tol[None, :], axis=1)
        else:
            lo_s = lo[:, i + 1, :][:, new_left].T
            hi_s = hi[:, i + 1, :][:, new_left].T
            keep = np.all(
                (new_part + lo_s <= target + tol + slack) & (new_part + hi_s >= target - tol - slack),
                axis=1,
            )
        prefix = np.concatenate([prefix[idx], k[:, None]], axis=1)[keep]
        part = new_part[keep]
        left = new_left[keep]
    if prefix.shape[0] == 0:
        return np.zeros((0, m), dtype=np.int64)
    return np.concatenate([prefix, left[:, None]], axis=1).astype(np.int64)


def enumerate_feasible(tables, target, tol, n, use_numba=None):
    """Enumerate all count vectors of total ``n`` satisfying every table row.

    ``tables`` has shape ``(R, m, n + 1)``.  With ``R == 0`` every composition
    is returned.  Output is an ``(K, m)`` int64 array in lexicographic order.
    """
    tables = np.asarray(tables)
    R, m, np1 = tables.shape
    if np1 != n + 1:
        raise ValueError("table width must be n + 1")
    if R == 0:
        tables = np.zeros((1, m, n + 1), dtype=np.int64)
        target = np.zeros(1, dtype=np.int64)
        tol = np.zeros(1, dtype=np.int64)
    target = np.asarray(target, dtype=tables.dtype)
    tol = np.asarray(tol, dtype=tables.dtype)
    if tables.dtype.kind == "f":
        scale = np.max(np.abs(tables), axis=(1, 2)) * m + np.abs(target) + 1.0
        slack = 1e-12 * scale
    else:
        slack = np.zeros_like(target)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and tables.dtype.kind in "if":
        lo, hi = suffix_bounds_numba(tables)
        return enumerate_numba(tables, lo, hi, target, tol, slack, int(n))
    lo, hi = suffix_bounds_numpy(tables)
    return enumerate_numpy(tables, lo, hi, target, tol, slack, int(n))


def count_compositions(n, m):
    return math.comb(n + m - 1, m - 1)


# ---------------------------------------------------------------------------
# log-space multinomials

@njit
def log_multinomial_numba(counts):
    K, m = counts.shape
    out = np.empty(K)
    for r in range(K):
        n = 0
        s = 0.0
        for i in range(m):
            n += counts[r, i]
            s += math.lgamma(counts[r, i] + 1.0)
        out[r] = math.lgamma(n + 1.0) - s
    return out


def log_multinomial_numpy(counts):
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=1)
    return gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=1)


def log_multinomial(counts, use_numba=None):
    """``ln(n! / prod n_i!)`` for every row of an integer count matrix."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if counts.ndim != 2:
        raise ValueError("counts must be 2-D")
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return log_multinomial_numba(counts)
    return log_multinomial_numpy(counts)


def log_type_probabilities(counts, log_q, use_numba=None):
    """``ln pi(nu; q)`` per row; zero counts contribute nothing."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    lm = log_multinomial(counts, use_numba=use_numba)
    log_q = np.asarray(log_q, dtype=np.float64)
    terms = np.where(counts > 0, counts * log_q[None, :], 0.0)
    return lm + terms.sum(axis=1)
