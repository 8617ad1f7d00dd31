"""Upper bound for ``S = sum mu_j a_j^2`` given ``A = sum mu_j^2 a_j^2`` and
``B = sum a_j^2`` over a nondecreasing nonnegative sequence ``mu``.

For any two reals ``P <= Q`` with ``mu`` values off ``(P, Q)`` one has
``(mu - P)(mu - Q) >= 0``, hence ``(P + Q) S <= A + P Q B``. With ``P, Q`` the
first two entries this gives :func:`lemma_bound`; :func:`brute_force_max`
solves the underlying linear program by enumerating its vertices (supports of
at most two distinct values).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SequenceInstance:
    mu: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if mu.shape != w.shape or mu.ndim != 1:
            raise ValueError("mu and weights must be 1-D arrays of equal length")
        if np.any(mu < 0) or np.any(np.diff(mu) < 0):
            raise ValueError("mu must be nonnegative and nondecreasing")
        if np.any(w < 0):
            raise ValueError("weights (a_j^2) must be nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "weights", w)

    @property
    def A(self) -> float:
        return float(np.sum(self.mu**2 * self.weights))

    @property
    def B(self) -> float:
        return float(np.sum(self.weights))

    @property
    def S(self) -> float:
        return float(np.sum(self.mu * self.weights))


def lemma_bound(mu1: float, mu2: float, A: float, B: float) -> float:
    """``(A + mu1 mu2 B) / (mu1 + mu2)``."""
    if mu1 < 0 or mu2 < mu1:
        raise ValueError("need 0 <= mu1 <= mu2")
    if mu1 + mu2 == 0:
        raise ValueError("bound undefined when mu1 = mu2 = 0")
    if A < 0 or B < 0:
        raise ValueError("A and B must be nonnegative")
    return (A + mu1 * mu2 * B) / (mu1 + mu2)


def instance_bound(inst: SequenceInstance) -> float:
    return lemma_bound(inst.mu[0], inst.mu[1], inst.A, inst.B)


def check_feasible(mu, A: float, B: float) -> None:
    """Raise if no nonnegative weights on ``mu`` reach ``A`` and ``B``."""
    mu = np.asarray(mu, dtype=float)
    if A < 0 or B < 0:
        raise ValueError(f"A = {A} and B = {B} must be nonnegative")
    sq = mu**2
    tol = 1e-12 * max(A, 1.0)
    if A < sq.min() * B - tol:
        raise ValueError(f"A = {A} below min(mu^2) B = {sq.min() * B}")
    if A > sq.max() * B + tol:
        raise ValueError(f"A = {A} above max(mu^2) B = {sq.max() * B}")


def brute_force_max(mu, A: float, B: float) -> tuple[float, tuple[float, ...]]:
    """Maximum of ``sum mu_j w_j`` over ``w >= 0`` with ``sum mu_j^2 w_j = A``
    and ``sum w_j = B``, by enumerating one- and two-point supports.

    Returns the maximum and the support (distinct ``mu`` values) attaining it.
    """
    vals = np.unique(np.asarray(mu, dtype=float))
    check_feasible(vals, A, B)
    if B == 0:
        return 0.0, ()
    best, support = -np.inf, ()
    tol = 1e-12 * max(A, 1.0)
    for m in vals:
        if abs(m * m * B - A) <= tol and m * B > best:
            best, support = m * B, (float(m),)
    for mr, ms in itertools.combinations(vals, 2):
        det = ms * ms - mr * mr
        wr = (ms * ms * B - A) / det
        ws = (A - mr * mr * B) / det
        if wr >= -1e-15 * B and ws >= -1e-15 * B:
            val = mr * max(wr, 0.0) + ms * max(ws, 0.0)
            if val > best:
                best, support = val, (float(mr), float(ms))
    return float(best), support


def random_instance(
    seed: int, length: int = 8, spread: float = 10.0, zero_fraction: float = 0.2
) -> SequenceInstance:
    """Sorted nonnegative ``mu`` and nonnegative weights with some exact zeros."""
    if length < 2:
        raise ValueError("length must be at least 2")
    if spread < 0:
        raise ValueError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    if spread == 0:
        mu = np.ones(length)
    else:
        mu = np.sort(rng.uniform(0.0, spread, length))
    w = rng.exponential(1.0, length)
    w[rng.random(length) < zero_fraction] = 0.0
    return SequenceInstance(mu, w)
