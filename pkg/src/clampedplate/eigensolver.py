"""Smallest eigenpairs of the assembled clamped biharmonic.

Two independent routes:

* :func:`solve_dense` -- LAPACK symmetric eigensolver on the dense matrix,
  used as the oracle for small problems;
* :func:`solve_shift_invert` -- Lanczos with full reorthogonalization on
  ``(B - sigma I)^{-1}``, applied through a banded Cholesky factorization.
  Converged vectors are locked and Lanczos is restarted in their orthogonal
  complement until no eigenvalue below the current K-th is found, which
  recovers exactly degenerate pairs (e.g. square symmetry).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .grid import Grid
from .operators import extended_laplacian

log = logging.getLogger(__name__)

DENSE_CAP = 4096
MULTIPLET_RTOL = 1e-8


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted eigenvalues with grid-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray
    method: str
    grid: Grid = field(repr=False)
    converged: bool = True

    @property
    def K(self) -> int:
        return len(self.eigenvalues)

    def u(self, j: int) -> np.ndarray:
        """Eigenvector ``u_j`` with 1-based index as in the eigenvalue list."""
        return self.vectors[:, j - 1]

    def multiplets(self, rtol: float = MULTIPLET_RTOL) -> list[list[int]]:
        """Groups of 1-based indices whose eigenvalues agree to ``rtol``."""
        groups: list[list[int]] = []
        for j, lam in enumerate(self.eigenvalues, start=1):
            if groups and abs(lam - self.eigenvalues[groups[-1][0] - 1]) <= rtol * abs(lam):
                groups[-1].append(j)
            else:
                groups.append([j])
        return groups


def _normalize(grid: Grid, vecs: np.ndarray) -> np.ndarray:
    """Scale to unit grid norm and fix signs deterministically."""
    vecs = vecs / (np.linalg.norm(vecs, axis=0) * grid.h ** (grid.n / 2))
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        total = v.sum()
        if abs(total) > 1e-8 * np.abs(v).sum():
            flip = total < 0
        else:
            flip = v[np.argmax(np.abs(v))] < 0
        if flip:
            vecs[:, j] = -v
    return vecs


def residual_norms(matrix, grid: Grid, values: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """``||B u - lambda u||`` in the grid norm, recomputed from scratch."""
    R = matrix @ vecs - vecs * values
    return np.linalg.norm(R, axis=0) * grid.h ** (grid.n / 2)


def _gram_factor(matrix, grid: Grid):
    """``(E, w, scale)`` with ``matrix == scale * E^T diag(w) E`` exactly, or None."""
    if matrix.shape != (grid.N, grid.N):
        return None
    E, _, w = extended_laplacian(grid)
    scale = grid.h**-4
    B = sp.csr_matrix(matrix)
    D = (E.T @ sp.diags(w) @ E) * scale - B
    if D.nnz and np.max(np.abs(D.data)) > 1e-13 * np.max(np.abs(B.data)):
        return None
    return E, w, scale


def rayleigh_quotients(matrix, grid: Grid, vecs: np.ndarray) -> np.ndarray:
    """Rayleigh quotients of the columns of ``vecs``.

    For the clamped biharmonic the factored form ``scale * ||W^{1/2} E v||^2``
    is used; it avoids the cancellation in ``v^T B v`` whose absolute error
    is of order ``eps * ||B||``.
    """
    norms = np.sum(vecs * vecs, axis=0)
    gram = _gram_factor(matrix, grid)
    if gram is None:
        return np.sum(vecs * (matrix @ vecs), axis=0) / norms
    E, w, scale = gram
    Ev = E @ vecs
    return scale * np.sum(w[:, None] * Ev * Ev, axis=0) / norms


def _finish(matrix, grid, values, vecs, method, converged=True) -> Spectrum:
    vecs = np.asarray(vecs)
    values = rayleigh_quotients(matrix, grid, vecs)
    order = np.argsort(values, kind="stable")
    values = np.asarray(values)[order]
    vecs = _normalize(grid, np.asarray(vecs)[:, order])
    res = residual_norms(matrix, grid, values, vecs)
    return Spectrum(values, vecs, res, method, grid, converged)


def solve_dense(matrix, grid: Grid, K: int, cap: int = DENSE_CAP) -> Spectrum:
    """Full symmetric eigendecomposition, smallest ``K`` pairs."""
    N = matrix.shape[0]
    if K > N:
        raise ValueError(f"K = {K} exceeds the matrix dimension {N}")
    if N > cap:
        raise ValueError(
            f"dimension {N} exceeds the dense cap {cap}; use solve_shift_invert instead"
        )
    A = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    values, vecs = sla.eigh(A, subset_by_index=(0, K - 1), driver="evr")
    return _finish(matrix, grid, values, vecs, "dense")


class BandedCholesky:
    """Cholesky factorization of an SPD sparse matrix in banded storage.

    A reverse Cuthill-McKee permutation is applied when it narrows the band.
    """

    def __init__(self, matrix, name: str = "matrix"):
        A = sp.csr_matrix(matrix)
        perm = reverse_cuthill_mckee(A, symmetric_mode=True)
        coo = A.tocoo()
        natural_bw = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        P = A[perm][:, perm].tocoo()
        rcm_bw = int(np.max(np.abs(P.row - P.col))) if P.nnz else 0
        if rcm_bw < natural_bw:
            self.perm = perm
            coo, bw = P, rcm_bw
        else:
            self.perm = None
            bw = natural_bw
        N = A.shape[0]
        band = np.zeros((bw + 1, N))
        upper = coo.col >= coo.row
        r, c = coo.row[upper], coo.col[upper]
        band[bw + r - c, c] = coo.data[upper]
        try:
            self.factor = sla.cholesky_banded(band, lower=False)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(
                f"Cholesky factorization of {name} (N = {N}, bandwidth {bw}) failed: {exc}"
            ) from exc
        self.bandwidth = bw
        self.N = N

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.perm is None:
            return sla.cho_solve_banded((self.factor, False), b)
        x = np.empty_like(b)
        x[self.perm] = sla.cho_solve_banded((self.factor, False), b[self.perm])
        return x


def _lanczos_cycle(op, locked: np.ndarray, start: np.ndarray, m: int, tol: float):
    """One Lanczos run of ``m`` steps with full reorthogonalization against the
    current basis and the locked vectors. Returns Ritz values, Ritz vectors and
    residual estimates ``|beta_m y_m|``."""
    N = start.shape[0]
    Q = np.zeros((N, m + 1))
    alpha = np.zeros(m)
    beta = np.zeros(m)

    def orth(v, basis):
        for _ in range(2):
            if basis.shape[1]:
                v = v - basis @ (basis.T @ v)
        return v

    q = orth(start, locked)
    q /= np.linalg.norm(q)
    Q[:, 0] = q
    steps = m
    for i in range(m):
        w = op(Q[:, i])
        alpha[i] = Q[:, i] @ w
        w = orth(w, locked)
        w = orth(w, Q[:, : i + 1])
        beta[i] = np.linalg.norm(w)
        if beta[i] <= tol * max(abs(alpha[i]), 1e-300):
            steps = i + 1
            break
        Q[:, i + 1] = w / beta[i]
    T = np.diag(alpha[:steps]) + np.diag(beta[: steps - 1], 1) + np.diag(beta[: steps - 1], -1)
    theta, Y = np.linalg.eigh(T)
    theta, Y = theta[::-1], Y[:, ::-1]
    est = np.abs(beta[steps - 1] * Y[-1, :])
    return theta, Q[:, :steps] @ Y, est


def solve_shift_invert(
    matrix,
    grid: Grid,
    K: int,
    sigma: float = 0.0,
    tol: float = 1e-10,
    seed: int = 0,
    max_cycles: int = 50,
    steps: int | None = None,
) -> Spectrum:
    """Smallest ``K`` eigenpairs via Lanczos on ``(B - sigma I)^{-1}``.

    ``sigma`` must lie below the smallest eigenvalue so the shifted matrix is
    positive definite. The result carries ``converged=False`` if ``max_cycles``
    restarts were not enough; nothing is dropped silently.
    """
    N = matrix.shape[0]
    if K > N:
        raise ValueError(f"K = {K} exceeds the matrix dimension {N}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = sp.csr_matrix(matrix)
    shifted = A - sigma * sp.identity(N, format="csr") if sigma else A
    chol = BandedCholesky(shifted, name=f"B - {sigma:g} I")
    rng = np.random.default_rng(seed)
    m = steps or min(N, max(2 * K + 20, 40))

    locked = np.zeros((N, 0))
    thetas: list[float] = []
    converged = False
    last = None
    for cycle in range(max_cycles):
        room = N - locked.shape[1]
        if room <= 0:
            converged = True
            break
        theta, X, est = _lanczos_cycle(
            chol.solve, locked, rng.standard_normal(N), min(m, room), 1e-14
        )
        last = X
        good = est <= tol * np.abs(theta)
        # Ritz values come largest first; lock only a converged prefix so no
        # unconverged eigenvalue is skipped over
        prefix = 0
        while prefix < len(theta) and good[prefix]:
            prefix += 1
        if prefix == 0:
            m = min(2 * m, N)
            log.debug("cycle %d: nothing converged, steps -> %d", cycle, m)
            continue
        kth = sorted(thetas, reverse=True)[K - 1] if len(thetas) >= K else -np.inf
        new = [i for i in range(prefix) if theta[i] > kth * (1 + 1e-12)]
        log.debug("cycle %d: %d converged, %d new", cycle, prefix, len(new))
        if not new:
            converged = True
            break
        if new:
            V = X[:, new]
            V -= locked @ (locked.T @ V)
            V, _ = np.linalg.qr(V)
            locked = np.hstack([locked, V])
            thetas.extend(theta[new])
    if not converged:
        log.warning("shift-invert Lanczos did not converge in %d cycles", max_cycles)

    # Rayleigh-Ritz on the locked basis with the original matrix
    if locked.shape[1] == 0:
        # nothing converged: return the best available Ritz vectors, flagged
        locked, _ = np.linalg.qr(last[:, : min(K, last.shape[1])])
        converged = False
    Z = np.column_stack([chol.solve(locked[:, j]) for j in range(locked.shape[1])])
    Z, _ = np.linalg.qr(Z)
    H = Z.T @ (A @ Z)
    H = 0.5 * (H + H.T)
    values, Y = np.linalg.eigh(H)
    vecs = Z @ Y
    take = min(K, len(values))
    if take < K:
        converged = False
    return _finish(A, grid, values[:take], vecs[:, :take], "shift-invert", converged)
