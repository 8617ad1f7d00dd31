"""Trial-function machinery built from ``g * u1``.

For a smooth multiplier ``g`` the commutator field

    p = Lap^2 g u1 + 2 grad(Lap g).grad u1 + 2 Lap g Lap u1
        + 2 Lap(grad g.grad u1) + 2 grad g.grad(Lap u1)

is evaluated with analytic derivatives of ``g`` and stencil derivatives of
``u1``. The checks below compare the spectral identities, integral
identities and inequalities that follow from it against the discrete data.
Inner products of node-vectors use :meth:`Grid.inner_product`; integrals of
derivative fields use the closed-set quadrature :meth:`Grid.integrate`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .eigensolver import Spectrum
from .grid import Grid
from .operators import Stencils, d1, d2, lap


@dataclass(frozen=True)
class GFields:
    """Padded samples of g and its derivatives."""

    g: np.ndarray
    grad: list[np.ndarray]
    lap: np.ndarray
    grad_lap: list[np.ndarray]
    bilap: np.ndarray


@dataclass(frozen=True)
class Multiplier:
    """``g(x) = profile(x[axis])`` with the profile's first four derivatives.

    ``derivs`` holds callables for the profile and its derivatives of orders
    1 to 4. ``analytic=False`` multipliers are differentiated on the lattice.
    """

    name: str
    axis: int
    derivs: tuple[Callable[[np.ndarray], np.ndarray], ...]
    analytic: bool = True

    def __call__(self, coords) -> np.ndarray:
        return self.derivs[0](coords[self.axis])

    def scaled(self, c: float) -> "Multiplier":
        """``c * g`` with the same derivative structure."""
        derivs = tuple((lambda x, d=d: c * d(x)) for d in self.derivs)
        return Multiplier(f"{c:g}*{self.name}", self.axis, derivs, self.analytic)

    def fields(self, grid: Grid) -> GFields:
        coords = grid.padded_coordinates()
        n = grid.n
        if not self.analytic:
            return _lattice_fields(self(coords), grid.h)
        x = coords[self.axis]
        f0, f1, f2, f3, f4 = (np.broadcast_to(d(x), x.shape).astype(float) for d in self.derivs)
        zero = np.zeros_like(x)
        grad = [f1 if a == self.axis else zero for a in range(n)]
        grad_lap = [f3 if a == self.axis else zero for a in range(n)]
        return GFields(f0, grad, f2, grad_lap, f4)


@dataclass(frozen=True)
class SampledMultiplier:
    """Multiplier given only as a callable of the coordinate arrays."""

    name: str
    func: Callable[..., np.ndarray]
    analytic: bool = False

    def __call__(self, coords) -> np.ndarray:
        return np.asarray(self.func(*coords), dtype=float)

    def fields(self, grid: Grid) -> GFields:
        return _lattice_fields(self(grid.padded_coordinates()), grid.h)


def _lattice_fields(G: np.ndarray, h: float) -> GFields:
    n = G.ndim
    L = lap(G, h)
    return GFields(
        G,
        [d1(G, a, h) for a in range(n)],
        L,
        [d1(L, a, h) for a in range(n)],
        lap(L, h),
    )


def _const(c):
    return lambda x: np.full_like(x, c, dtype=float)


def constant(value: float = 1.0, axis: int = 0) -> Multiplier:
    z = _const(0.0)
    return Multiplier(f"const({value:g})", axis, (_const(value), z, z, z, z))


def coordinate(axis: int = 0) -> Multiplier:
    z = _const(0.0)
    return Multiplier(f"x{axis}", axis, (lambda x: x, _const(1.0), z, z, z))


def cos_mode(a: float, axis: int = 0) -> Multiplier:
    return Multiplier(
        f"cos({a:g}x{axis})",
        axis,
        (
            lambda x: np.cos(a * x),
            lambda x: -a * np.sin(a * x),
            lambda x: -(a**2) * np.cos(a * x),
            lambda x: a**3 * np.sin(a * x),
            lambda x: a**4 * np.cos(a * x),
        ),
    )


def sin_mode(a: float, axis: int = 0) -> Multiplier:
    return Multiplier(
        f"sin({a:g}x{axis})",
        axis,
        (
            lambda x: np.sin(a * x),
            lambda x: a * np.cos(a * x),
            lambda x: -(a**2) * np.sin(a * x),
            lambda x: -(a**3) * np.cos(a * x),
            lambda x: a**4 * np.sin(a * x),
        ),
    )


def bump(axis: int = 0) -> Multiplier:
    """``x^2 (1 - x)^2`` along one axis."""
    return Multiplier(
        f"bump(x{axis})",
        axis,
        (
            lambda x: x**2 * (1 - x) ** 2,
            lambda x: 2 * x - 6 * x**2 + 4 * x**3,
            lambda x: 2 - 12 * x + 12 * x**2,
            lambda x: -12 + 24 * x,
            _const(24.0),
        ),
    )


def parse_multiplier(spec: str, axis: int = 0) -> Multiplier:
    """``one``, ``x``, ``bump``, ``cos:A`` or ``sin:A``."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    if kind == "one":
        return constant(1.0, axis)
    if kind == "x":
        return coordinate(axis)
    if kind == "bump":
        return bump(axis)
    if kind in ("cos", "sin") and arg:
        a = float(arg)
        return cos_mode(a, axis) if kind == "cos" else sin_mode(a, axis)
    raise ValueError(f"unknown multiplier {spec!r}")


def _u1_fields(u1, stencils: Stencils):
    h = stencils.h
    U = stencils.extend(u1)
    Du = [d1(U, a, h) for a in range(stencils.n)]
    LU = lap(U, h)
    DLU = [d1(LU, a, h) for a in range(stencils.n)]
    return U, Du, LU, DLU


def build_p_padded(g, u1, grid: Grid, stencils: Stencils | None = None) -> np.ndarray:
    stencils = stencils or Stencils(grid)
    F = g.fields(grid)
    U, Du, LU, DLU = _u1_fields(u1, stencils)
    n = grid.n
    w = sum(F.grad[a] * Du[a] for a in range(n))
    return (
        F.bilap * U
        + 2 * sum(F.grad_lap[a] * Du[a] for a in range(n))
        + 2 * F.lap * LU
        + 2 * lap(w, grid.h)
        + 2 * sum(F.grad[a] * DLU[a] for a in range(n))
    )


def build_p(g, u1, grid: Grid, stencils: Stencils | None = None) -> np.ndarray:
    """Commutator field ``p`` at the interior nodes."""
    return grid.gather(build_p_padded(g, u1, grid, stencils))


@dataclass(frozen=True, eq=False)
class TrialExpansion:
    g: np.ndarray = field(repr=False)
    gu1: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    r: np.ndarray
    s: np.ndarray
    gu1_norm_sq: float
    p_norm_sq: float
    k: int
    phi: np.ndarray = field(repr=False)
    phi_norm_sq: float

    @property
    def tail_mass(self) -> float:
        """``||g u1||^2 - sum_{j<=K} r_j^2``: weight beyond the computed modes."""
        return max(self.gu1_norm_sq - float(np.sum(self.r**2)), 0.0)


def trial_expansion(spectrum: Spectrum, g, k: int = 0, stencils: Stencils | None = None) -> TrialExpansion:
    """Coefficients ``r_j, s_j`` (j = 1..K) and ``phi = g u1 - sum_{j<=k} r_j u_j``."""
    grid = spectrum.grid
    if not 0 <= k <= spectrum.K:
        raise ValueError(f"k must lie in 0..{spectrum.K}")
    u1 = spectrum.u(1)
    gvals = g(grid.coords.T)
    gu1 = gvals * u1
    p = build_p(g, u1, grid, stencils)
    w = grid.h**grid.n
    r = w * (spectrum.vectors.T @ gu1)
    s = w * (spectrum.vectors.T @ p)
    phi = gu1 - spectrum.vectors[:, :k] @ r[:k]
    return TrialExpansion(
        gvals, gu1, p, r, s, grid.norm_sq(gu1), grid.norm_sq(p), k, phi, grid.norm_sq(phi)
    )


def verify_sj_identity(spectrum: Spectrum, g, K: int | None = None, stencils=None) -> np.ndarray:
    """``|s_j - (gamma_j - gamma_1) r_j| / (1 + |(gamma_j - gamma_1) r_j|)`` for j = 1..K."""
    K = K or spectrum.K
    t = trial_expansion(spectrum, g, 0, stencils)
    mu = spectrum.eigenvalues[:K] - spectrum.eigenvalues[0]
    target = mu * t.r[:K]
    return np.abs(t.s[:K] - target) / (1 + np.abs(target))


def phi_orthogonality(spectrum: Spectrum, g, k: int, stencils=None) -> float:
    """``max_{j<=k} |<u_j, phi>|``."""
    t = trial_expansion(spectrum, g, k, stencils)
    if k == 0:
        return 0.0
    ip = spectrum.grid.h**spectrum.grid.n * (spectrum.vectors[:, :k].T @ t.phi)
    return float(np.max(np.abs(ip)))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        """Relative gap ``|lhs - rhs| / max(|lhs|, |rhs|)`` (0 when both vanish)."""
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def lemma22_check(g, u1, grid: Grid, stencils: Stencils | None = None) -> IdentityCheck:
    """``int g u1 p`` against its integrated-by-parts form."""
    stencils = stencils or Stencils(grid)
    F = g.fields(grid)
    U, Du, LU, _ = _u1_fields(u1, stencils)
    n = grid.n
    gdu = sum(F.grad[a] * Du[a] for a in range(n))
    gg = sum(F.grad[a] ** 2 for a in range(n))
    integrand = F.lap**2 * U**2 + 4 * gdu**2 - 2 * gg * U * LU + 4 * U * F.lap * gdu
    p = build_p(g, u1, grid, stencils)
    lhs = grid.inner_product(g(grid.coords.T) * u1, p)
    return IdentityCheck(lhs, grid.integrate(integrand))


def lemma23_derivatives(a: float, b: float, af: np.ndarray) -> dict[str, np.ndarray]:
    """Derivatives of ``g1 = cos(a f)``, ``g2 = sin(a f)`` when ``|grad f|^2 = 1``
    and ``Lap f = b``. Gradient entries are coefficients of ``grad f``."""
    c, s = np.cos(af), np.sin(af)
    return {
        "grad_g1": -a * s,
        "lap_g1": -(a**2) * c - a * b * s,
        "grad_lap_g1": a**3 * s - a**2 * b * c,
        "bilap_g1": a**4 * c + 2 * a**3 * b * s - a**2 * b**2 * c,
        "grad_g2": a * c,
        "lap_g2": -(a**2) * s + a * b * c,
        "grad_lap_g2": -(a**3) * c - a**2 * b * s,
        "bilap_g2": a**4 * s - 2 * a**3 * b * c - a**2 * b**2 * s,
    }


def general_g_derivatives(a, f, grad_f, grad_f_sq, grad_grad_f_sq, lap_f, grad_lap_f, lap_grad_f_sq, bilap_f):
    """Derivatives of ``cos(a f)`` and ``sin(a f)`` for an arbitrary smooth ``f``.

    Vector quantities (``grad_f``, ``grad_grad_f_sq`` = grad |grad f|^2,
    ``grad_lap_f``) are sequences of per-axis arrays.
    """
    c, s = np.cos(a * f), np.sin(a * f)
    dot = lambda u, v: sum(x * y for x, y in zip(u, v))
    gf_ggf = dot(grad_grad_f_sq, grad_f)
    gl_gf = dot(grad_lap_f, grad_f)
    return {
        "grad_g1": [-a * s * gf for gf in grad_f],
        "lap_g1": -(a**2) * c * grad_f_sq - a * s * lap_f,
        "grad_lap_g1": [
            a**3 * s * grad_f_sq * gf - a**2 * c * ggf - a**2 * c * lap_f * gf - a * s * glf
            for gf, ggf, glf in zip(grad_f, grad_grad_f_sq, grad_lap_f)
        ],
        "bilap_g1": a**4 * c * grad_f_sq**2
        + 2 * a**3 * s * gf_ggf
        + 2 * a**3 * s * grad_f_sq * lap_f
        - a**2 * c * lap_grad_f_sq
        - 2 * a**2 * c * gl_gf
        - a**2 * c * lap_f**2
        - a * s * bilap_f,
        "grad_g2": [a * c * gf for gf in grad_f],
        "lap_g2": -(a**2) * s * grad_f_sq + a * c * lap_f,
        "grad_lap_g2": [
            -(a**3) * c * grad_f_sq * gf - a**2 * s * ggf - a**2 * s * lap_f * gf + a * c * glf
            for gf, ggf, glf in zip(grad_f, grad_grad_f_sq, grad_lap_f)
        ],
        "bilap_g2": a**4 * s * grad_f_sq**2
        - 2 * a**3 * c * gf_ggf
        - 2 * a**3 * c * grad_f_sq * lap_f
        - a**2 * s * lap_grad_f_sq
        - 2 * a**2 * s * gl_gf
        - a**2 * s * lap_f**2
        + a * c * bilap_f,
    }


@dataclass(frozen=True, eq=False)
class PairTrialData:
    """``g1 = cos(a x_m)``, ``g2 = sin(a x_m)`` and their commutator fields.

    ``p1``, ``p2`` use the closed forms (bracket terms times cos/sin);
    ``p1_direct``, ``p2_direct`` come from the general five-term formula.
    All arrays are interior node-vectors.
    """

    a: float
    m: int
    b: float
    u1: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    bracket1: np.ndarray = field(repr=False)
    bracket2: np.ndarray = field(repr=False)
    p1: np.ndarray = field(repr=False)
    p2: np.ndarray = field(repr=False)
    p1_direct: np.ndarray = field(repr=False)
    p2_direct: np.ndarray = field(repr=False)
    dm_u1: np.ndarray = field(repr=False)


def build_pair(a: float, m: int, u1, grid: Grid, stencils: Stencils | None = None) -> PairTrialData:
    """Pair data for ``f = x_m`` (so ``|grad f| = 1`` and ``Lap f = b = 0``)."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    if not 0 <= m < grid.n:
        raise ValueError(f"axis {m} out of range for n = {grid.n}")
    stencils = stencils or Stencils(grid)
    h = grid.h
    b = 0.0
    U, Du, LU, DLU = _u1_fields(u1, stencils)
    dfu = Du[m]
    dffu = d2(U, m, h)
    lap_dfu = lap(dfu, h)
    df_lap = DLU[m]
    B1 = (a**4 - a**2 * b**2) * U - 4 * a**2 * b * dfu - 2 * a**2 * LU - 4 * a**2 * dffu
    B2 = 2 * a**3 * b * U + 4 * a**3 * dfu - 2 * a * b * LU - 2 * a * lap_dfu - 2 * a * df_lap
    x = grid.padded_coordinates()[m]
    c, s = np.cos(a * x), np.sin(a * x)
    gather = grid.gather
    return PairTrialData(
        a=a,
        m=m,
        b=b,
        u1=np.asarray(u1, dtype=float),
        g1=gather(c),
        g2=gather(s),
        bracket1=gather(B1),
        bracket2=gather(B2),
        p1=gather(B1 * c + B2 * s),
        p2=gather(B1 * s - B2 * c),
        p1_direct=build_p(cos_mode(a, m), u1, grid, stencils),
        p2_direct=build_p(sin_mode(a, m), u1, grid, stencils),
        dm_u1=gather(dfu),
    )


def prop21_check(pair: PairTrialData, grid: Grid, pointwise: bool = False) -> IdentityCheck:
    """``int |p1|^2 + |p2|^2`` against the integrated squared brackets.

    ``pointwise=True`` uses the closed-form ``p1, p2`` (exact up to round-off);
    otherwise the five-term fields are compared (discretization-level gap).
    """
    if pointwise:
        p1, p2 = pair.p1, pair.p2
    else:
        p1, p2 = pair.p1_direct, pair.p2_direct
    lhs = grid.norm_sq(p1) + grid.norm_sq(p2)
    rhs = grid.norm_sq(pair.bracket1) + grid.norm_sq(pair.bracket2)
    return IdentityCheck(lhs, rhs)


def prop21_pointwise_error(pair: PairTrialData) -> float:
    """Max relative pointwise deviation of ``|p1|^2 + |p2|^2`` from the brackets."""
    lhs = pair.p1**2 + pair.p2**2
    rhs = pair.bracket1**2 + pair.bracket2**2
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(rhs), 1e-300))


@dataclass(frozen=True)
class Prop22Check(IdentityCheck):
    """``rhs`` uses ``-2 a^2 int u1 Lap u1``; ``rhs_gradient_form`` replaces it by
    ``2 a^2 int |grad u1|^2`` (equal in the continuum, O(h^2) apart here)."""

    rhs_gradient_form: float = float("nan")


def prop22_check(pair: PairTrialData, grid: Grid, stencils: Stencils | None = None) -> Prop22Check:
    """``int g1 u1 p1 + int g2 u1 p2`` (five-term fields) against
    ``a^4 int u1^2 + 4 a^2 int (d u1/dx_m)^2 - 2 a^2 int u1 Lap u1`` (``b = 0``)."""
    stencils = stencils or Stencils(grid)
    u1 = pair.u1
    lhs = grid.inner_product(pair.g1 * u1, pair.p1_direct) + grid.inner_product(
        pair.g2 * u1, pair.p2_direct
    )
    grad = stencils.gradient(u1)
    dm_sq = grid.integrate(grad[pair.m] ** 2)
    u_lap_u = grid.inner_product(u1, grid.gather(stencils.laplacian(u1)))
    grad_sq = sum(grid.integrate(g**2) for g in grad)
    a = pair.a
    base = a**4 * grid.norm_sq(u1) + 4 * a**2 * dm_sq
    return Prop22Check(lhs, base - 2 * a**2 * u_lap_u, base + 2 * a**2 * grad_sq)


@dataclass(frozen=True)
class InequalityMargin:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_margin(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.margin / scale if scale > 0 else 0.0


def _gaps(spectrum: Spectrum, k: int, eigenvalues=None):
    if k < 0 or k + 2 > spectrum.K:
        raise ValueError(f"need 0 <= k and k + 2 <= K = {spectrum.K}")
    lam = spectrum.eigenvalues if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    if len(lam) < spectrum.K:
        raise ValueError("eigenvalue override shorter than the spectrum")
    mu = lam[: spectrum.K] - lam[0]
    # k is 1-based: gamma_{k+1} sits at position k
    return mu, mu[k], mu[k + 1]


def theorem21_check(spectrum: Spectrum, g, k: int, eigenvalues=None, stencils=None) -> InequalityMargin:
    """``(P + Q) int g u1 p <= ||p||^2 + P Q ||g u1||^2`` with
    ``P = gamma_{k+1} - gamma_1``, ``Q = gamma_{k+2} - gamma_1``.

    ``eigenvalues`` replaces the discrete eigenvalues (oracle-assisted check).
    """
    _, P, Q = _gaps(spectrum, k, eigenvalues)
    t = trial_expansion(spectrum, g, 0, stencils)
    grid = spectrum.grid
    lhs = (P + Q) * grid.inner_product(t.gu1, t.p)
    rhs = t.p_norm_sq + P * Q * t.gu1_norm_sq
    return InequalityMargin(lhs, rhs)


@dataclass(frozen=True)
class Lemma21Application:
    lhs: float
    rhs: float
    direct_lhs: float
    tail_mass: float
    relative_tail: float
    chain_gap: float
    inconclusive: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def relative_margin(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.margin / scale if scale > 0 else 0.0


def lemma21_gap_inequality_check(
    spectrum: Spectrum, g, k: int, eigenvalues=None, stencils=None, tail_limit: float = 0.01
) -> Lemma21Application:
    """The sequence lemma applied with ``mu_j = gamma_j - gamma_1`` and ``a_j = r_j``.

    lhs = (P + Q) sum_{k<j<=K} mu_j r_j^2 (truncated at K, see ``tail_mass``),
    rhs = (||p||^2 - sum_{j<=k} mu_j^2 r_j^2) + P Q ||phi||^2.
    ``direct_lhs`` is the untruncated ``(P + Q) int phi p``.
    ``chain_gap`` = sum_{j<=k} (mu_j - P)(mu_j - Q) r_j^2 >= 0 is the amount by
    which the theorem margin exceeds this one.
    """
    mu, P, Q = _gaps(spectrum, k, eigenvalues)
    t = trial_expansion(spectrum, g, k, stencils)
    grid = spectrum.grid
    r = t.r
    lhs = (P + Q) * float(np.sum(mu[k:] * r[k:] ** 2))
    rhs = (t.p_norm_sq - float(np.sum(mu[:k] ** 2 * r[:k] ** 2))) + P * Q * t.phi_norm_sq
    direct = (P + Q) * grid.inner_product(t.phi, t.p)
    chain = float(np.sum((mu[:k] - P) * (mu[:k] - Q) * r[:k] ** 2))
    rel_tail = t.tail_mass / t.gu1_norm_sq if t.gu1_norm_sq > 0 else 0.0
    return Lemma21Application(
        lhs, rhs, direct, t.tail_mass, rel_tail, chain, rel_tail > tail_limit
    )
