"""Universal eigenvalue inequalities and asymptotics, evaluated as margin reports.

Every check takes a plain ascending eigenvalue array (computed or analytic),
indexes it from 1 and records ``margin = rhs - lhs`` per k. Verdicts compare
the relative margin against a declared discretization band ``eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .functionals import EigenfunctionFunctionals, constant_C
from .oracles import ap_coefficient

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MarginRecord:
    k: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_margin(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.margin / scale if scale > 0 else 0.0


@dataclass(frozen=True)
class InequalityReport:
    name: str
    records: tuple[MarginRecord, ...]
    source: str = "computed"
    eps: float = 0.0
    asserted: bool = True
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.k))
        object.__setattr__(self, "records", recs)
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def verdict(self) -> str:
        worst = self.min_relative_margin
        if worst < -self.eps:
            return VIOLATED
        if worst < 0:
            return INCONCLUSIVE
        return HOLDS

    @property
    def min_relative_margin(self) -> float:
        return min((r.relative_margin for r in self.records), default=0.0)

    @property
    def min_margin(self) -> float:
        return min((r.margin for r in self.records), default=0.0)

    def rows(self) -> list[tuple[int, float, float, float, float]]:
        return [(r.k, r.lhs, r.rhs, r.margin, r.relative_margin) for r in self.records]


def _eigs(values, k_max: int) -> np.ndarray:
    lam = np.asarray(values, dtype=float)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if len(lam) < k_max + 1:
        raise ValueError(f"need at least k_max + 1 = {k_max + 1} eigenvalues, got {len(lam)}")
    if np.any(np.diff(lam) < 0):
        raise ValueError("eigenvalues must be ascending")
    # 1-based view: lam1[k] is gamma_k
    return np.concatenate([[np.nan], lam])


def richardson_eps(coarse, fine, k_max: int, order: float = 2.0, ratio: float = 2.0, factor: float = 5.0) -> float:
    """``factor`` times the largest Richardson estimate of the relative error of
    ``fine`` over the first ``k_max`` eigenvalues (grid spacing ratio ``ratio``)."""
    c = np.asarray(coarse, dtype=float)[:k_max]
    f = np.asarray(fine, dtype=float)[:k_max]
    if len(c) < k_max or len(f) < k_max:
        raise ValueError("not enough eigenvalues for the requested k_max")
    err = np.abs(f - c) / (ratio**order - 1)
    return float(factor * np.max(err / np.abs(f)))


def theorem11_report(
    eigenvalues, functionals: EigenfunctionFunctionals, k_max: int, source: str = "computed", eps: float = 0.0
) -> InequalityReport:
    """``(sqrt(G_{k+1} - G_1) - sqrt(G_k - G_1))^2
    <= 16 sqrt(G_1)/n ((G_{k+1} - G_1)(G_k - G_1))^{1/4} + C`` for k = 1..k_max."""
    g = _eigs(eigenvalues, k_max)
    n = functionals.n
    C = constant_C(functionals)
    recs = []
    for k in range(1, k_max + 1):
        P = max(g[k] - g[1], 0.0)
        Q = max(g[k + 1] - g[1], 0.0)
        lhs = (math.sqrt(Q) - math.sqrt(P)) ** 2
        rhs = 16.0 * math.sqrt(g[1]) / n * (P * Q) ** 0.25 + C
        recs.append(MarginRecord(k, lhs, rhs))
    return InequalityReport("theorem11", tuple(recs), source, eps)


def ppw_report(eigenvalues, n: int, k_max: int, source="computed", eps=0.0) -> InequalityReport:
    """``G_{k+1} - G_k <= 8(n+2)/(n^2 k) sum_{i<=k} G_i``."""
    g = _eigs(eigenvalues, k_max)
    recs = [
        MarginRecord(k, g[k + 1] - g[k], 8.0 * (n + 2) / (n * n * k) * float(np.sum(g[1 : k + 1])))
        for k in range(1, k_max + 1)
    ]
    return InequalityReport("ppw", tuple(recs), source, eps)


def hook_report(eigenvalues, n: int, k_max: int, source="computed", eps=0.0) -> InequalityReport:
    """``n^2 k^2 / (8(n+2)) <= sum_i G_i^{1/2}/(G_{k+1} - G_i) * sum_i G_i^{1/2}``.

    A k with ``G_{k+1} = G_i`` for some ``i <= k`` is skipped and noted."""
    g = _eigs(eigenvalues, k_max)
    recs, notes = [], []
    for k in range(1, k_max + 1):
        gaps = g[k + 1] - g[1 : k + 1]
        if np.any(gaps <= 0):
            notes.append(f"k={k} skipped: G_{k + 1} equals an earlier eigenvalue")
            continue
        roots = np.sqrt(g[1 : k + 1])
        rhs = float(np.sum(roots / gaps) * np.sum(roots))
        recs.append(MarginRecord(k, n * n * k * k / (8.0 * (n + 2)), rhs))
    return InequalityReport("hook", tuple(recs), source, eps, notes=tuple(notes))


def _quadratic_report(name, const, eigenvalues, n, k_max, source, eps, asserted):
    g = _eigs(eigenvalues, k_max)
    recs = []
    for k in range(1, k_max + 1):
        d = g[k + 1] - g[1 : k + 1]
        recs.append(MarginRecord(k, float(np.sum(d**2)), const * float(np.sum(d * g[1 : k + 1]))))
    return InequalityReport(name, tuple(recs), source, eps, asserted)


def cheng_yang_report(eigenvalues, n: int, k_max: int, source="computed", eps=0.0) -> InequalityReport:
    """``sum (G_{k+1} - G_i)^2 <= 8(n+2)/n^2 sum (G_{k+1} - G_i) G_i``."""
    return _quadratic_report("cheng_yang", 8.0 * (n + 2) / n**2, eigenvalues, n, k_max, source, eps, True)


def conjecture_report(eigenvalues, n: int, k_max: int, source="computed", eps=0.0) -> InequalityReport:
    """Same quadratic form with constant ``8/n``; an open problem, recorded only."""
    return _quadratic_report("conjecture", 8.0 / n, eigenvalues, n, k_max, source, eps, False)


def classical_suite(eigenvalues, n: int, k_max: int, source="computed", eps=0.0) -> list[InequalityReport]:
    return [
        ppw_report(eigenvalues, n, k_max, source, eps),
        hook_report(eigenvalues, n, k_max, source, eps),
        cheng_yang_report(eigenvalues, n, k_max, source, eps),
        conjecture_report(eigenvalues, n, k_max, source, eps),
    ]


def levine_protter_check(eigenvalues, n: int, vol: float, k_max: int, source="computed", eps=0.0) -> InequalityReport:
    """``(1/k) sum_{j<=k} G_j >= n/(n+4) * coef * k^{4/n}``."""
    g = np.asarray(eigenvalues, dtype=float)
    if len(g) < k_max:
        raise ValueError(f"need {k_max} eigenvalues, got {len(g)}")
    coef = ap_coefficient(n, vol)
    recs = []
    for k in range(1, k_max + 1):
        lower = n / (n + 4.0) * coef * k ** (4.0 / n)
        # lower bound: store as lhs <= rhs
        recs.append(MarginRecord(k, lower, float(np.mean(g[:k]))))
    return InequalityReport("levine_protter", tuple(recs), source, eps)


@dataclass(frozen=True)
class AsymptoticFit:
    coefficient: float
    k: np.ndarray
    ratios: np.ndarray
    relative_distance: np.ndarray
    beam_pi_ratio: np.ndarray | None = None


def agmon_pleijel_fit(eigenvalues, n: int, vol: float, k_range=None, beam: bool = False) -> AsymptoticFit:
    """``G_k / k^{4/n}`` against the leading coefficient; for the beam also
    ``G_k^{1/4} / (k + 1/2)``, which tends to pi."""
    g = np.asarray(eigenvalues, dtype=float)
    ks = np.arange(1, len(g) + 1) if k_range is None else np.asarray(list(k_range))
    if ks.min() < 1 or ks.max() > len(g):
        raise ValueError("k_range outside the available spectrum")
    coef = ap_coefficient(n, vol)
    vals = g[ks - 1]
    ratios = vals / ks ** (4.0 / n)
    pi_ratio = vals**0.25 / (ks + 0.5) if beam else None
    return AsymptoticFit(coef, ks, ratios, np.abs(ratios - coef) / coef, pi_ratio)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    k_lo: int
    k_hi: int
    expected: float

    @property
    def band(self) -> tuple[float, float]:
        """Approximate 95% band on the slope."""
        return self.slope - 2 * self.stderr, self.slope + 2 * self.stderr


@dataclass(frozen=True)
class OrderScan:
    rhs_slope: SlopeFit
    gap_slope: SlopeFit


def _fit(k, y, expected) -> SlopeFit:
    res = linregress(np.log(k), np.log(y))
    return SlopeFit(float(res.slope), float(res.stderr), int(k[0]), int(k[-1]), expected)


def remark11_order_scan(eigenvalues, functionals: EigenfunctionFunctionals, k_range=None) -> OrderScan:
    """Log-log slopes of the square-root-gap bound (expected ``2/n``) and of the
    implied bound on ``G_{k+1} - G_k`` (expected ``3/n``).

    The default window is the upper half ``[k_max/2, k_max]``, away from the
    small-k regime where the additive constant dominates.
    """
    g = np.asarray(eigenvalues, dtype=float)
    n = functionals.n
    if k_range is None:
        k_max = len(g) - 1
        k_range = range(max(1, k_max // 2), k_max + 1)
    k = np.asarray(list(k_range))
    if len(k) < 10:
        raise ValueError(f"need at least 10 points for the regression, got {len(k)}")
    if k.min() < 1 or k.max() + 1 > len(g):
        raise ValueError("k_range needs eigenvalues up to k_max + 1")
    C = constant_C(functionals)
    P = g[k - 1] - g[0]
    Q = g[k] - g[0]
    rhs = 16.0 * math.sqrt(g[0]) / n * (P * Q) ** 0.25 + C
    gap_bound = (np.sqrt(Q) + np.sqrt(P)) * np.sqrt(rhs)
    return OrderScan(_fit(k, rhs, 2.0 / n), _fit(k, gap_bound, 3.0 / n))
