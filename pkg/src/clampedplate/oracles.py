"""Analytic reference spectra for the clamped beam and the clamped unit disk.

Beam on [0, 1]:  gamma_k = beta_k^4, ``cos(beta) cosh(beta) = 1``.
Unit disk:       gamma = x^4 over roots of
                 ``J_m(x) I_{m+1}(x) + I_m(x) J_{m+1}(x) = 0``, m >= 0,
                 modes with m >= 1 counted twice.

Residuals are reported for scaled characteristic functions
(``cos(b) - 1/cosh(b)`` and the disk function divided by ``I_m(x)``), which
keep the exponentially growing factors out of the tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bessel
from .functionals import EigenfunctionFunctionals


@dataclass(frozen=True)
class OracleSpectrum:
    domain: str
    eigenvalues: np.ndarray
    roots: np.ndarray
    orders: np.ndarray
    residuals: np.ndarray
    n: int
    volume: float

    @property
    def K(self) -> int:
        return len(self.eigenvalues)


def bisect(f, lo: float, hi: float, xtol: float = 1e-13) -> float:
    """Bisection on a verified sign change, down to ``xtol`` or float resolution."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def beam_characteristic(beta: float) -> float:
    """Scaled clamped-beam function ``cos(beta) - 1/cosh(beta)``."""
    return math.cos(beta) - 1.0 / math.cosh(beta)


def beam_roots(K: int) -> np.ndarray:
    """First ``K`` positive roots of ``cos(beta) cosh(beta) = 1``.

    Root k lies in ``(k pi, (k+1) pi)``: ``cos`` changes sign there while
    ``1/cosh`` stays below ``1/cosh(pi)``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    return np.array(
        [bisect(beam_characteristic, k * math.pi, (k + 1) * math.pi) for k in range(1, K + 1)]
    )


def beam_spectrum(K: int) -> OracleSpectrum:
    beta = beam_roots(K)
    res = np.array([abs(beam_characteristic(b)) for b in beta])
    return OracleSpectrum("beam", beta**4, beta, np.zeros(K, dtype=int), res, 1, 1.0)


def disk_characteristic(m: int, x: float) -> float:
    """``J_m(x) I_{m+1}(x) / I_m(x) + J_{m+1}(x)``; same roots as the cross product."""
    J = bessel.jn_all(m + 1, x)
    I = bessel.iv_all(m + 1, x)
    return J[m] * (I[m + 1] / I[m]) + J[m + 1]


def disk_order_roots(m: int, x_max: float, step: float = 0.05) -> list[float]:
    """All roots of the order-``m`` disk function in ``(0, x_max]``."""
    xs = np.arange(step, x_max + step / 2, step)
    vals = [disk_characteristic(m, x) for x in xs]
    roots = []
    for i in range(len(xs) - 1):
        if vals[i] == 0:
            roots.append(float(xs[i]))
        elif (vals[i] > 0) != (vals[i + 1] > 0):
            roots.append(bisect(lambda t: disk_characteristic(m, t), xs[i], xs[i + 1]))
    return roots


def disk_spectrum(K: int) -> OracleSpectrum:
    """Lowest ``K`` clamped unit-disk eigenvalues counted with multiplicity."""
    if K < 1:
        raise ValueError("K must be at least 1")
    x_max = 2.0 * math.sqrt(K) + 6.0
    while True:
        if x_max > bessel.X_MAX:
            raise OverflowError(
                f"K = {K} needs Bessel arguments beyond {bessel.X_MAX}; reduce K"
            )
        entries = []
        m = 0
        while True:
            roots = disk_order_roots(m, x_max)
            if not roots:
                break
            mult = 1 if m == 0 else 2
            for x in roots:
                entries.extend([(x, m)] * mult)
            m += 1
        entries.sort()
        if len(entries) >= K:
            break
        x_max += 5.0
    entries = entries[:K]
    roots = np.array([e[0] for e in entries])
    orders = np.array([e[1] for e in entries])
    res = np.array([abs(disk_characteristic(int(m), x)) for x, m in entries])
    return OracleSpectrum("disk", roots**4, roots, orders, res, 2, math.pi)


def gamma_function(x: float) -> float:
    """Gamma at positive integers and half-integers by exact recursion."""
    twice = round(2 * x)
    if twice <= 0 or abs(twice - 2 * x) > 1e-12:
        raise ValueError("only positive integer or half-integer arguments")
    if twice % 2 == 0:
        val, t = 1.0, 1.0
    else:
        val, t = math.sqrt(math.pi), 0.5
    while t < x - 1e-12:
        val *= t
        t += 1.0
    return val


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / gamma_function(n / 2 + 1)


def ap_coefficient(n: int, vol: float) -> float:
    """Leading coefficient ``16 pi^4 / (omega_n vol)^{4/n}`` of the asymptotics."""
    if n < 1 or vol <= 0:
        raise ValueError("need n >= 1 and vol > 0")
    return 16 * math.pi**4 / (unit_ball_volume(n) * vol) ** (4.0 / n)


def _gauss(a: float, b: float, npts: int):
    t, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def beam_mode_functionals(npts: int = 200) -> EigenfunctionFunctionals:
    """Functionals of the first clamped-beam mode on [0, 1] by Gauss quadrature."""
    b = float(beam_roots(1)[0])
    s = (math.cosh(b) - math.cos(b)) / (math.sinh(b) - math.sin(b))
    x, w = _gauss(0.0, 1.0, npts)
    bx = b * x
    ch, sh, c, sn = np.cosh(bx), np.sinh(bx), np.cos(bx), np.sin(bx)
    u = ch - c - s * (sh - sn)
    u1 = b * (sh + sn - s * (ch - c))
    u2 = b**2 * (ch + c - s * (sh + sn))
    u3 = b**3 * (sh - sn - s * (ch + c))
    norm = w @ u**2
    lap_sq = (w @ u2**2) / norm
    return EigenfunctionFunctionals(
        grad_norm_sq=(w @ u1**2) / norm,
        lap_sq=lap_sq,
        grad_lap_sq=(w @ u3**2) / norm,
        pure_second_sq=lap_sq,
        gamma1=b**4,
        n=1,
    )


def disk_mode_functionals(npts: int = 200) -> EigenfunctionFunctionals:
    """Functionals of the first clamped unit-disk mode (radial, m = 0).

    ``u(r) = J0(b r) I0(b) - I0(b r) J0(b)``; integrals over the disk are
    reduced to radial Gauss quadrature with the angular parts done exactly.
    """
    b = float(disk_spectrum(1).roots[0])
    J0b, I0b = bessel.jn(0, b), bessel.iv(0, b)
    r, w = _gauss(0.0, 1.0, npts)
    vals = []
    for ri in r:
        x = b * ri
        J = bessel.jn_all(1, x)
        I = bessel.iv_all(1, x)
        u = J[0] * I0b - I[0] * J0b
        du = b * (-J[1] * I0b - I[1] * J0b)
        # J0'' = -J0 + J1/x, I0'' = I0 - I1/x
        d2u = b**2 * ((-J[0] + J[1] / x) * I0b - (I[0] - I[1] / x) * J0b)
        lap = b**2 * (-J[0] * I0b - I[0] * J0b)
        dlap = b**3 * (J[1] * I0b - I[1] * J0b)
        vals.append((u, du, d2u, lap, dlap))
    u, du, d2u, lap, dlap = (np.array(v) for v in zip(*vals))
    tw = 2 * math.pi * w * r
    norm = tw @ u**2
    v = du / r
    # angular averages: int (u_xx^2 + u_yy^2) dtheta = 3pi/2 (u''^2 + v^2) + pi u'' v
    pure = (w * r) @ (1.5 * math.pi * (d2u**2 + v**2) + math.pi * d2u * v)
    return EigenfunctionFunctionals(
        grad_norm_sq=(tw @ du**2) / norm,
        lap_sq=(tw @ lap**2) / norm,
        grad_lap_sq=(tw @ dlap**2) / norm,
        pure_second_sq=pure / norm,
        gamma1=b**4,
        n=2,
    )
