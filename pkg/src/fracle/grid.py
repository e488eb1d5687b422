"""Uniform grids on intervals and rectangles with interior-node quadrature.

Functions live on the interior nodes of a uniform partition and are
implicitly zero outside the domain (homogeneous Dirichlet exterior
condition). Quadrature weights are trapezoid weights in which the two
cells adjacent to each boundary are absorbed into the first and last
interior node, so the weights sum exactly to the measure of the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DomainGrid",
    "GridFunction",
    "Quadrature",
    "make_grid",
]


@dataclass(frozen=True)
class DomainGrid:
    """Uniform discretization of an interval (dim=1) or rectangle (dim=2).

    ``n_interior`` counts the nodes strictly inside the domain along each
    axis; the spacing along axis ``i`` is ``(b_i - a_i) / (n_i + 1)``.
    """

    dim: int
    extent: tuple[tuple[float, float], ...]
    n_interior: tuple[int, ...]
    spacing: tuple[float, ...]

    @property
    def n_total(self) -> int:
        total = 1
        for n in self.n_interior:
            total *= n
        return total

    @property
    def measure(self) -> float:
        m = 1.0
        for a, b in self.extent:
            m *= b - a
        return m

    def axis_nodes(self, axis: int) -> np.ndarray:
        a, _ = self.extent[axis]
        h = self.spacing[axis]
        n = self.n_interior[axis]
        return a + h * np.arange(1, n + 1)

    def coords(self) -> np.ndarray:
        """Interior node coordinates, shape (n_total,) in 1D, (n_total, 2) in 2D.

        In 2D nodes are ordered x-major: flat index = ix * ny + iy.
        """
        if self.dim == 1:
            return self.axis_nodes(0)
        x = self.axis_nodes(0)
        y = self.axis_nodes(1)
        xx, yy = np.meshgrid(x, y, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def quadrature(self) -> "Quadrature":
        weights = _axis_weights(self.spacing[0], self.n_interior[0])
        if self.dim == 2:
            wy = _axis_weights(self.spacing[1], self.n_interior[1])
            weights = np.outer(weights, wy).ravel()
        return Quadrature(grid=self, weights=weights)

    def to_dict(self) -> dict:
        extent = list(self.extent[0]) if self.dim == 1 else [list(e) for e in self.extent]
        n = self.n_interior[0] if self.dim == 1 else list(self.n_interior)
        return {"dim": self.dim, "extent": extent, "n_interior": n}

    @staticmethod
    def from_dict(d: dict) -> "DomainGrid":
        return make_grid(d["dim"], d["extent"], d["n_interior"])


def _axis_weights(h: float, n: int) -> np.ndarray:
    # Trapezoid weights with the half-open boundary cells folded onto the
    # first/last interior nodes; total weight is exactly (n + 1) * h.
    w = np.full(n, h)
    w[0] = 1.5 * h
    w[-1] = 1.5 * h
    return w


def make_grid(dim: int, extent, n_interior) -> DomainGrid:
    """Build a uniform grid of interior nodes over an interval or rectangle.

    ``extent`` is ``(a, b)`` in 1D or ``((ax, bx), (ay, by))`` in 2D;
    ``n_interior`` is an int in 1D or a pair of ints in 2D.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if dim == 1:
        pairs = [_as_extent_pair(extent)]
        counts = [int(n_interior)] if np.isscalar(n_interior) else [int(n_interior[0])]
    else:
        if len(extent) != 2:
            raise ValueError("2D extent must give endpoints for both axes")
        pairs = [_as_extent_pair(e) for e in extent]
        if np.isscalar(n_interior):
            counts = [int(n_interior), int(n_interior)]
        else:
            counts = [int(n) for n in n_interior]
            if len(counts) != 2:
                raise ValueError("2D n_interior must give a count for both axes")
    for a, b in pairs:
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise ValueError(f"degenerate extent ({a}, {b}): endpoints must be ordered")
    for n in counts:
        if n < 2:
            raise ValueError(f"n_interior must be >= 2, got {n}")
    spacing = tuple((b - a) / (n + 1) for (a, b), n in zip(pairs, counts))
    return DomainGrid(
        dim=dim,
        extent=tuple(pairs),
        n_interior=tuple(counts),
        spacing=spacing,
    )


def _as_extent_pair(e) -> tuple[float, float]:
    a, b = float(e[0]), float(e[1])
    return (a, b)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the interior nodes, zero outside the domain."""

    grid: DomainGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_total,):
            raise ValueError(
                f"values must have shape ({self.grid.n_total},), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def zeros(grid: DomainGrid) -> "GridFunction":
        return GridFunction(grid, np.zeros(grid.n_total))

    @staticmethod
    def from_callable(grid: DomainGrid, f: Callable) -> "GridFunction":
        xs = grid.coords()
        if grid.dim == 1:
            vals = np.asarray([f(x) for x in xs], dtype=float)
        else:
            vals = np.asarray([f(x, y) for x, y in xs], dtype=float)
        return GridFunction(grid, vals)

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "values": [float(v) for v in self.values]}

    @staticmethod
    def from_dict(d: dict) -> "GridFunction":
        return GridFunction(DomainGrid.from_dict(d["grid"]), np.asarray(d["values"]))


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Positive weights aligned with the interior nodes; realizes integrals over the domain."""

    grid: DomainGrid
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.grid.n_total,):
            raise ValueError("weights must align with interior nodes")
        if not np.all(w > 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "weights", w)

    def _check(self, f: GridFunction) -> np.ndarray:
        if f.grid != self.grid:
            raise ValueError("grid function does not live on this quadrature's grid")
        return f.values

    def integrate(self, f: GridFunction) -> float:
        """Weighted sum over interior nodes, second-order accurate for smooth data."""
        return float(np.dot(self.weights, self._check(f)))

    def inner(self, f: GridFunction, g: GridFunction) -> float:
        return float(np.dot(self.weights, self._check(f) * self._check(g)))

    def lp_norm(self, f: GridFunction, p: float) -> float:
        """Discrete L^p norm, p >= 1."""
        if p < 1:
            raise ValueError(f"lp_norm requires p >= 1, got {p}")
        vals = self._check(f)
        return float(np.sum(self.weights * np.abs(vals) ** p) ** (1.0 / p))

    def lp_norm_values(self, values: np.ndarray, p: float) -> float:
        if p < 1:
            raise ValueError(f"lp_norm requires p >= 1, got {p}")
        return float(np.sum(self.weights * np.abs(values) ** p) ** (1.0 / p))
