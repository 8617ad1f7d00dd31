"""Computational domains and uniform lattices.

A :class:`Grid` stores its unknowns on the interior lattice points only.
Every field can also be lifted to a *padded* array that covers the closed
bounding box plus a few ghost layers; all stencil work happens on those
padded arrays.

Boundary handling depends on the domain kind:

* boxes (and intervals) put zeros on the boundary faces and fill ghost
  layers by even reflection, which encodes ``u = du/dn = 0``;
* the masked disk puts zeros everywhere outside the disk (plain zero
  extension, first order at the curved boundary).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: number of ghost layers kept around the closed lattice
MARGIN = 3


@dataclass(frozen=True)
class Domain:
    """A bounded domain in R^n: an interval, an axis-aligned box or a disk.

    ``extents`` are the side lengths of the bounding box and ``origin`` its
    lower corner. For the disk, ``radius`` and ``center`` define the mask and
    the bounding box is ``[center - radius, center + radius]^2``.
    """

    kind: str
    extents: tuple[float, ...]
    origin: tuple[float, ...]
    radius: float | None = None
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("interval", "box", "disk"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not 1 <= len(self.extents) <= 3:
            raise ValueError("dimension must be 1, 2 or 3")
        if len(self.origin) != len(self.extents):
            raise ValueError("origin and extents differ in dimension")
        if any(e <= 0 for e in self.extents):
            raise ValueError(f"extents must be positive, got {self.extents}")
        if self.kind == "interval" and len(self.extents) != 1:
            raise ValueError("an interval is one-dimensional")
        if self.kind == "disk":
            if len(self.extents) != 2:
                raise ValueError("masked disk requires n = 2")
            if self.radius is None or self.radius <= 0:
                raise ValueError("masked disk requires a positive radius")

    @classmethod
    def interval(cls, length: float = 1.0, origin: float = 0.0) -> "Domain":
        return cls("interval", (float(length),), (float(origin),))

    @classmethod
    def box(cls, extents: Sequence[float], origin: Sequence[float] | None = None) -> "Domain":
        extents = tuple(float(e) for e in extents)
        if origin is None:
            origin = (0.0,) * len(extents)
        kind = "interval" if len(extents) == 1 else "box"
        return cls(kind, extents, tuple(float(o) for o in origin))

    @classmethod
    def disk(cls, radius: float = 1.0, center: Sequence[float] = (0.0, 0.0)) -> "Domain":
        r = float(radius)
        c = tuple(float(x) for x in center)
        return cls("disk", (2 * r, 2 * r), (c[0] - r, c[1] - r), radius=r, center=c)

    @property
    def n(self) -> int:
        return len(self.extents)

    @property
    def volume(self) -> float:
        if self.kind == "disk":
            return math.pi * self.radius**2
        return float(np.prod(self.extents))


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform lattice on a :class:`Domain` with spacing ``h`` on every axis.

    Attributes
    ----------
    divisions : per-axis number of cells of the bounding box
    nodes : (N, n) integer multi-indices of the interior nodes, lexicographic
    coords : (N, n) coordinates of the interior nodes
    index_map : padded-shape array, linear index of interior nodes, -1 elsewhere
    weights : padded-shape quadrature weights of the closed node set
        (1 on interior nodes, 1/2 on box faces, 1 on the disk rim, 0 elsewhere)
    """

    domain: Domain
    divisions: tuple[int, ...]
    h: float
    nodes: np.ndarray = field(repr=False)
    coords: np.ndarray = field(repr=False)
    index_map: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(d + 1 + 2 * MARGIN for d in self.divisions)

    @property
    def interior_slices(self) -> tuple[np.ndarray, ...]:
        """Padded-array fancy index selecting interior nodes in order."""
        return tuple(self.nodes[:, a] + MARGIN for a in range(self.n))

    @property
    def is_box(self) -> bool:
        return self.domain.kind != "disk"

    def linear_index(self, multi_index: Sequence[int]) -> int:
        """Linear index of an interior multi-index, -1 if not interior."""
        padded = tuple(int(i) + MARGIN for i in multi_index)
        return int(self.index_map[padded])

    def padded_coordinates(self) -> list[np.ndarray]:
        """Coordinate arrays (``indexing='ij'``) over the padded lattice."""
        axes = [
            self.domain.origin[a] + (np.arange(s) - MARGIN) * self.h
            for a, s in enumerate(self.padded_shape)
        ]
        return np.meshgrid(*axes, indexing="ij")

    def scatter(self, u: np.ndarray) -> np.ndarray:
        """Padded array carrying ``u`` on interior nodes and zero elsewhere."""
        u = self._check(u)
        out = np.zeros(self.padded_shape)
        out[self.interior_slices] = u
        return out

    def extend(self, u: np.ndarray) -> np.ndarray:
        """Padded array with the clamped ghost rule applied.

        Boxes: zero on the boundary, even reflection across every face.
        Disk: zero outside the mask.
        """
        out = self.scatter(u)
        if self.is_box:
            reflect_ghosts(out, self.divisions)
        return out

    def gather(self, padded: np.ndarray) -> np.ndarray:
        """Interior node-vector of a padded array."""
        return np.asarray(padded)[self.interior_slices]

    def inner_product(self, u: np.ndarray, v: np.ndarray) -> float:
        """Discrete L2 pairing ``h^n * sum(u * v)`` over interior nodes."""
        u = self._check(u)
        v = self._check(v)
        return float(self.h**self.n * np.dot(u, v))

    def norm_sq(self, u: np.ndarray) -> float:
        return self.inner_product(u, u)

    def integrate(self, padded: np.ndarray) -> float:
        """Quadrature of a padded field over the closed node set."""
        return float(self.h**self.n * np.sum(self.weights * padded))

    def _check(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise ValueError(f"expected a node-vector of length {self.N}, got shape {u.shape}")
        return u


def reflect_ghosts(arr: np.ndarray, divisions: Sequence[int]) -> None:
    """Fill ghost layers in place by even reflection about each box face."""
    for axis, d in enumerate(divisions):
        lo, hi = MARGIN, MARGIN + d
        view = np.moveaxis(arr, axis, 0)
        for i in range(1, MARGIN + 1):
            view[lo - i] = view[lo + i]
            view[hi + i] = view[hi - i]


def build_grid(domain: Domain, divisions: int | Sequence[int]) -> Grid:
    """Lattice with ``h = extent / divisions`` on each axis.

    ``divisions`` may be a single int (applied to every axis). The spacing
    must come out identical on all axes.
    """
    n = domain.n
    if isinstance(divisions, (int, np.integer)):
        divisions = (int(divisions),) * n
    divisions = tuple(int(d) for d in divisions)
    if len(divisions) != n:
        raise ValueError(f"need {n} division counts, got {len(divisions)}")
    if any(d < 4 for d in divisions):
        raise ValueError(f"at least 4 divisions per axis are needed, got {divisions}")
    spacings = [e / d for e, d in zip(domain.extents, divisions)]
    h = spacings[0]
    if any(abs(s - h) > 1e-12 * h for s in spacings):
        raise ValueError(
            f"non-uniform spacing {spacings}: extents {domain.extents} with "
            f"divisions {divisions}; choose divisions proportional to the extents"
        )

    shape = tuple(d + 1 + 2 * MARGIN for d in divisions)
    idx = np.meshgrid(*[np.arange(s) - MARGIN for s in shape], indexing="ij")

    if domain.kind == "disk":
        d = divisions[0]
        # exact integer test of x^2 + y^2 < R^2 with x = R (2i - d) / d
        inside = (2 * idx[0] - d) ** 2 + (2 * idx[1] - d) ** 2 < d * d
    else:
        inside = np.ones(shape, dtype=bool)
        for a, d in enumerate(divisions):
            inside &= (idx[a] >= 1) & (idx[a] <= d - 1)
    count = int(inside.sum())
    if count < 1:
        raise ValueError("domain has no interior lattice nodes at these divisions")

    index_map = -np.ones(shape, dtype=np.int64)
    index_map[inside] = np.arange(count)  # C order == lexicographic
    nodes = np.argwhere(inside) - MARGIN
    coords = np.asarray(domain.origin) + nodes * h

    weights = inside.astype(float)
    neighbour = np.zeros(shape, dtype=bool)
    for a in range(n):
        neighbour |= np.roll(inside, 1, axis=a) | np.roll(inside, -1, axis=a)
    rim = neighbour & ~inside
    if domain.kind == "disk":
        weights[rim] = 1.0
    else:
        # trapezoid weight on faces; edge and corner nodes never touch the interior
        weights[rim] = 0.5

    return Grid(domain, divisions, h, nodes, coords, index_map, weights)
