"""Finite-difference Laplacian, clamped biharmonic and derivative stencils.

The biharmonic matrix is assembled as ``B = E^T W E / h^4`` where ``E`` maps
interior unknowns to the (integer-scaled) ghost-extended 5-point Laplacian on
the closed node set and ``W`` holds the closed-set quadrature weights. On
boxes this reproduces the classical 13-point stencil with even-reflection
ghosts (near-boundary diagonal 7 in 1D) and makes
``u^T B u h^n = sum W (Lap_h u)^2 h^n`` an identity.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .grid import MARGIN, Grid


def shift(arr: np.ndarray, axis: int, s: int) -> np.ndarray:
    """Array whose entry at i is ``arr[i + s]`` along ``axis`` (zero fill)."""
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    if s > 0:
        src[axis] = slice(s, None)
        dst[axis] = slice(None, -s)
    elif s < 0:
        src[axis] = slice(None, s)
        dst[axis] = slice(-s, None)
    else:
        return arr.copy()
    out[tuple(dst)] = arr[tuple(src)]
    return out


def d1(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Centered first difference."""
    return (shift(arr, axis, 1) - shift(arr, axis, -1)) / (2 * h)


def d2(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Three-point second difference."""
    return (shift(arr, axis, 1) - 2 * arr + shift(arr, axis, -1)) / h**2


def lap(arr: np.ndarray, h: float) -> np.ndarray:
    return sum(d2(arr, a, h) for a in range(arr.ndim))


class Stencils:
    """Derivative appliers sharing the clamped ghost rule of the grid.

    Every method takes an interior node-vector and returns padded arrays
    (one per axis where applicable). Values are meaningful on the closed node
    set; use :meth:`Grid.gather` for interior values and
    :meth:`Grid.integrate` for quadrature.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.h = grid.h
        self.n = grid.n

    def extend(self, u):
        return self.grid.extend(u)

    def gradient(self, u) -> list[np.ndarray]:
        U = self.extend(u)
        return [d1(U, a, self.h) for a in range(self.n)]

    def pure_second(self, u) -> list[np.ndarray]:
        U = self.extend(u)
        return [d2(U, a, self.h) for a in range(self.n)]

    def laplacian(self, u) -> np.ndarray:
        return lap(self.extend(u), self.h)

    def grad_laplacian(self, u) -> list[np.ndarray]:
        # Lap_h on the ghost-extended field, then centered differences
        L = lap(self.extend(u), self.h)
        return [d1(L, a, self.h) for a in range(self.n)]


def _ghost_target(grid: Grid, padded_idx: np.ndarray) -> np.ndarray:
    """Linear interior index reached by padded multi-indices after the ghost
    rule, or -1 where the clamped value is zero."""
    idx = padded_idx - MARGIN
    if grid.is_box:
        idx = idx.copy()
        for a, d in enumerate(grid.divisions):
            col = idx[:, a]
            col[col < 0] = -col[col < 0]
            col[col > d] = 2 * d - col[col > d]
    return grid.index_map[tuple((idx + MARGIN).T)]


def extended_laplacian(grid: Grid) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
    """Integer-coefficient ghost-extended Laplacian ``E`` (``h^2 * Lap_h``).

    Returns ``(E, rows, w)`` with ``E`` of shape (M, N) where the M rows are
    the closed nodes (padded multi-indices ``rows``) and ``w`` their weights.
    """
    rows = np.argwhere(grid.weights > 0)
    w = grid.weights[tuple(rows.T)]
    n = grid.n
    r_list, c_list, v_list = [], [], []
    offsets = [(np.zeros(n, dtype=int), -2.0 * n)]
    for a in range(n):
        for s in (-1, 1):
            e = np.zeros(n, dtype=int)
            e[a] = s
            offsets.append((e, 1.0))
    for off, coef in offsets:
        tgt = _ghost_target(grid, rows + off)
        keep = tgt >= 0
        r_list.append(np.nonzero(keep)[0])
        c_list.append(tgt[keep])
        v_list.append(np.full(int(keep.sum()), coef))
    E = sp.coo_matrix(
        (np.concatenate(v_list), (np.concatenate(r_list), np.concatenate(c_list))),
        shape=(len(rows), grid.N),
    ).tocsr()
    E.sum_duplicates()
    return E, rows, w


def assemble_laplacian(grid: Grid) -> sp.csr_matrix:
    """``-Lap_h`` with zero Dirichlet values (symmetric positive definite)."""
    nodes = grid.nodes + MARGIN
    n = grid.n
    r_list = [np.arange(grid.N)]
    c_list = [np.arange(grid.N)]
    v_list = [np.full(grid.N, 2.0 * n)]
    for a in range(n):
        for s in (-1, 1):
            nb = nodes.copy()
            nb[:, a] += s
            tgt = grid.index_map[tuple(nb.T)]
            keep = tgt >= 0
            r_list.append(np.nonzero(keep)[0])
            c_list.append(tgt[keep])
            v_list.append(np.full(int(keep.sum()), -1.0))
    A = sp.coo_matrix(
        (np.concatenate(v_list), (np.concatenate(r_list), np.concatenate(c_list))),
        shape=(grid.N, grid.N),
    ).tocsr()
    return A / grid.h**2


def assemble_biharmonic(grid: Grid) -> sp.csr_matrix:
    """Clamped ``Lap_h^2`` as ``E^T W E / h^4``.

    Integer and half-integer arithmetic keeps the product exact, so the
    result is symmetric entry for entry.
    """
    E, _, w = extended_laplacian(grid)
    B = (E.T @ sp.diags(w) @ E).tocsr()
    B.sum_duplicates()
    B.eliminate_zeros()
    B = B / grid.h**4
    return B.tocsr()


def write_coo(matrix: sp.spmatrix, path: str | Path) -> None:
    """Dump the upper triangle as ``row col value`` lines (0-based, 17 digits)."""
    upper = sp.triu(matrix).tocoo()
    order = np.lexsort((upper.col, upper.row))
    with open(path, "w") as fh:
        fh.write(f"% {matrix.shape[0]} {matrix.shape[1]} {upper.nnz}\n")
        for k in order:
            fh.write(f"{upper.row[k]} {upper.col[k]} {upper.data[k]:.17g}\n")
