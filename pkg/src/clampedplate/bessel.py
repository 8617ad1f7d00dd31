"""Integer-order Bessel functions J_m and I_m for moderate real arguments.

J uses the ascending series for small x and Miller's backward recurrence
(normalized by J_0 + 2 sum J_2k = 1) otherwise; I uses the ascending series,
which has only positive terms. Arguments are limited to ``X_MAX``.
"""
from __future__ import annotations

import math

X_MAX = 60.0
_SERIES_CUTOFF = 2.0


def _check(x: float) -> float:
    x = float(x)
    if x < 0:
        raise ValueError("only nonnegative arguments are supported")
    if x > X_MAX:
        raise OverflowError(f"argument {x} exceeds the supported range {X_MAX}")
    return x


def _series(m: int, x: float, sign: int) -> float:
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term *= sign * q / (k * (k + m))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total


def jn_all(mmax: int, x: float) -> list[float]:
    """``[J_0(x), ..., J_mmax(x)]``."""
    x = _check(x)
    if x == 0.0:
        return [1.0] + [0.0] * mmax
    if x <= _SERIES_CUTOFF:
        return [_series(m, x, -1) for m in range(mmax + 1)]
    top = max(mmax, int(x))
    start = 2 * ((top + 20 + int(math.sqrt(40 * top))) // 2)
    vals = [0.0] * (start + 2)
    j_next, j_cur = 0.0, 1e-30
    vals[start] = j_cur
    norm = 0.0
    for k in range(start, 0, -1):
        j_prev = 2 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        vals[k - 1] = j_cur
        if abs(j_cur) > 1e250:
            vals = [v * 1e-250 for v in vals]
            j_next *= 1e-250
            j_cur *= 1e-250
    norm = vals[0] + 2 * sum(vals[2 : start + 1 : 2])
    return [v / norm for v in vals[: mmax + 1]]


def jn(m: int, x: float) -> float:
    return jn_all(m, x)[m]


def iv_all(mmax: int, x: float) -> list[float]:
    """``[I_0(x), ..., I_mmax(x)]`` by the ascending series."""
    x = _check(x)
    return [_series(m, x, 1) for m in range(mmax + 1)]


def iv(m: int, x: float) -> float:
    return _series(m, _check(x), 1)
