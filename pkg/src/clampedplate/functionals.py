"""Integral functionals of the first eigenfunction and the gap constant C."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eigensolver import Spectrum
from .grid import Grid
from .operators import Stencils


@dataclass(frozen=True)
class EigenfunctionFunctionals:
    """Scalar integrals of the normalized first eigenfunction ``u1``.

    grad_norm_sq   : int |grad u1|^2
    lap_sq         : int (Lap u1)^2          (equals gamma1 for an eigenfunction)
    grad_lap_sq    : int |grad Lap u1|^2
    pure_second_sq : int sum_m (d^2 u1 / dx_m^2)^2
    """

    grad_norm_sq: float
    lap_sq: float
    grad_lap_sq: float
    pure_second_sq: float
    gamma1: float
    n: int

    def scaled(self, factor: float) -> "EigenfunctionFunctionals":
        return EigenfunctionFunctionals(
            self.grad_norm_sq * factor,
            self.lap_sq * factor,
            self.grad_lap_sq * factor,
            self.pure_second_sq * factor,
            self.gamma1 * factor,
            self.n,
        )


def compute_functionals(
    spectrum: Spectrum, grid: Grid | None = None, stencils: Stencils | None = None
) -> EigenfunctionFunctionals:
    grid = grid or spectrum.grid
    stencils = stencils or Stencils(grid)
    u1 = spectrum.u(1).copy()
    norm = grid.norm_sq(u1)
    if abs(norm - 1.0) > 1e-10:
        warnings.warn(f"u1 has squared norm {norm:.6g}; renormalizing", RuntimeWarning)
        u1 /= math.sqrt(norm)
    integ = grid.integrate
    grad = stencils.gradient(u1)
    second = stencils.pure_second(u1)
    glap = stencils.grad_laplacian(u1)
    L = stencils.laplacian(u1)
    return EigenfunctionFunctionals(
        grad_norm_sq=sum(integ(g**2) for g in grad),
        lap_sq=integ(L**2),
        grad_lap_sq=sum(integ(g**2) for g in glap),
        pure_second_sq=sum(integ(s**2) for s in second),
        gamma1=float(spectrum.eigenvalues[0]),
        n=grid.n,
    )


def constant_C_branches(f: EigenfunctionFunctionals) -> tuple[float, float]:
    n = f.n
    if f.grad_norm_sq <= 0:
        raise ValueError("grad_norm_sq must be positive for an eigenfunction")
    first = 8.0 * f.grad_lap_sq / ((n + 2) * f.grad_norm_sq)
    second = (4.0 * (n + 12) * f.gamma1 + 16.0 * f.pure_second_sq) / n
    return first, second


def constant_C(f: EigenfunctionFunctionals) -> float:
    """Additive constant of the square-root gap bound."""
    return max(constant_C_branches(f))


@dataclass(frozen=True)
class OptimalA:
    a_sq: float
    sqrt_pq: float
    c: float

    @property
    def a4_bounded(self) -> bool:
        """``a^4 <= sqrt(P Q)``; holds whenever c >= 0."""
        return self.a_sq**2 <= self.sqrt_pq * (1 + 1e-12)

    @property
    def residual(self) -> float:
        """Relative residual of ``a^2 (a^2 + c) = sqrt(P Q)``."""
        lhs = self.a_sq * (self.a_sq + self.c)
        return abs(lhs - self.sqrt_pq) / max(self.sqrt_pq, 1e-300)


def optimal_a(P: float, Q: float, grad_norm_sq: float, n: int) -> OptimalA:
    """Nonnegative root ``a^2`` of ``a^2 (a^2 + 2 (n+2)/n |grad u1|^2) = sqrt(P Q)``.

    ``P = gamma_{k+1} - gamma_1`` and ``Q = gamma_{k+2} - gamma_1``.
    """
    if P < 0 or Q < 0:
        raise ValueError(f"eigenvalue gaps must be nonnegative, got P={P}, Q={Q}")
    c = 2.0 * (n + 2) * grad_norm_sq / n
    s = math.sqrt(P * Q)
    if s == 0:
        return OptimalA(0.0, 0.0, c)
    # cancellation-free form of (-c + sqrt(c^2 + 4 s)) / 2
    a_sq = 2.0 * s / (c + math.sqrt(c * c + 4.0 * s))
    return OptimalA(a_sq, s, c)


def rational_bound(k1: float, k2: float, k3: float, n: int) -> float:
    """Upper bound of ``(k1 + t k2) / (n t + k3)`` over ``t >= 0``."""
    if k1 < 0 or k2 <= 0 or k3 <= 0:
        raise ValueError("need k1 >= 0, k2 > 0, k3 > 0")
    return max(k1 / k3, k2 / n)


def gap_chain(f: EigenfunctionFunctionals, P: float, Q: float) -> dict[str, float]:
    """Evaluate the intermediate bounds leading to the square-root gap estimate
    for one pair ``P <= Q`` of shifted eigenvalues.

    Returns the left side ``P + Q``, the bound obtained with the optimal
    ``a`` before the rational-function step (``chain_rhs``), the same bound
    after it (``rational_rhs``) and the final form
    ``(sqrt Q - sqrt P)^2 <= 16 sqrt(gamma1)/n (PQ)^{1/4} + C`` (``final_lhs``,
    ``final_rhs``).
    """
    n = f.n
    G = f.grad_norm_sq
    opt = optimal_a(P, Q, G, n)
    a2 = opt.a_sq
    X = n * a2 + 2 * (n + 2) * G
    k1 = 16.0 * f.grad_lap_sq
    k2 = 4.0 * (n + 12) * f.gamma1 + 16.0 * f.pure_second_sq
    extra = 16.0 * a2**2 * G / X
    if a2 > 0:
        core = a2 * (a2 + opt.c) + P * Q / (a2 * (a2 + opt.c))
    else:
        core = 0.0
    chain_rhs = core + extra + (k1 + k2 * a2) / X
    rational_rhs = core + extra + constant_C(f)
    return {
        "a_sq": a2,
        "lhs": P + Q,
        "chain_rhs": chain_rhs,
        "rational_rhs": rational_rhs,
        "final_lhs": (math.sqrt(Q) - math.sqrt(P)) ** 2,
        "final_rhs": 16.0 * math.sqrt(f.gamma1) / n * (P * Q) ** 0.25 + constant_C(f),
        "final_rhs_measured": 16.0 * G / n * (P * Q) ** 0.25 + constant_C(f),
    }
