"""Uniform rectangular grids with an insulated-boundary Laplacian.

The spatial domain is a 1D interval or a 2D rectangle discretized with
equispaced nodes including the boundary.  The Laplacian uses the standard
second-order central stencil; at the boundary a mirrored ghost node
enforces a zero normal derivative to second order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PreconditionError


@dataclass(frozen=True)
class Grid:
    """Equispaced node lattice over an interval or rectangle.

    ``extents`` are the physical side lengths, ``counts`` the number of
    nodes per axis (boundary nodes included, so spacing is
    ``extent / (count - 1)``).
    """

    extents: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        problems = []
        if self.dim not in (1, 2):
            problems.append(f"grid must be 1D or 2D, got {self.dim} axes")
        if len(self.counts) != len(self.extents):
            problems.append("extents and counts must have the same length")
        for ax, (e, c) in enumerate(zip(self.extents, self.counts)):
            if e <= 0.0:
                problems.append(f"axis {ax}: extent must be positive, got {e}")
            if c < 3:
                problems.append(f"axis {ax}: at least 3 nodes required, got {c}")
        if problems:
            raise ConfigurationError(problems)

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / (c - 1) for e, c in zip(self.extents, self.counts))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.counts))

    def axes(self) -> tuple[np.ndarray, ...]:
        """Node coordinates along each axis."""
        return tuple(np.linspace(0.0, e, c) for e, c in zip(self.extents, self.counts))

    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights (shape = counts) integrating over the domain."""
        w = None
        for h, c in zip(self.spacing, self.counts):
            w1 = np.full(c, h)
            w1[0] = w1[-1] = 0.5 * h
            w = w1 if w is None else np.multiply.outer(w, w1)
        return w


@dataclass
class Field:
    """Nodal values of a scalar state over a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.counts:
            raise PreconditionError(
                f"field shape {self.values.shape} does not match grid {self.grid.counts}"
            )
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("field contains non-finite values")

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.counts, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        coords = np.meshgrid(*grid.axes(), indexing="ij")
        return cls(grid, np.asarray(fn(*coords), dtype=float))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def _second_difference(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central second difference along one axis with mirror ghost nodes."""
    out = np.empty_like(values)
    u = np.moveaxis(values, axis, 0)
    d = np.moveaxis(out, axis, 0)
    d[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    # mirror ghost: u[-1] == u[1] and u[n] == u[n-2]
    d[0] = 2.0 * (u[1] - u[0])
    d[-1] = 2.0 * (u[-2] - u[-1])
    out = np.moveaxis(d, 0, axis)
    return out / (h * h)


def laplacian_neumann(field: Field) -> Field:
    """Discrete Laplacian with zero-normal-derivative boundary handling."""
    total = np.zeros_like(field.values)
    for axis, h in enumerate(field.grid.spacing):
        total += _second_difference(field.values, axis, h)
    return Field(field.grid, total)


def sample_at(field: Field, point) -> float:
    """Multilinear interpolation of the field at an interior point.

    The point must stay more than one grid spacing away from the
    boundary along every axis.
    """
    grid = field.grid
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (grid.dim,):
        raise PreconditionError(
            f"point has {point.shape[0]} coordinates for a {grid.dim}D grid"
        )
    idx = []
    frac = []
    for ax, (p, e, h, c) in enumerate(
        zip(point, grid.extents, grid.spacing, grid.counts)
    ):
        if not (p > h and p < e - h):
            raise PreconditionError(
                f"axis {ax}: point coordinate {p} is not strictly interior "
                f"(must lie in ({h}, {e - h}))"
            )
        i = int(np.floor(p / h))
        i = min(i, c - 2)
        idx.append(i)
        frac.append(p / h - i)
    if grid.dim == 1:
        i, t = idx[0], frac[0]
        v = field.values
        return float((1 - t) * v[i] + t * v[i + 1])
    (i, j), (t, s) = idx, frac
    v = field.values
    return float(
        (1 - t) * (1 - s) * v[i, j]
        + t * (1 - s) * v[i + 1, j]
        + (1 - t) * s * v[i, j + 1]
        + t * s * v[i + 1, j + 1]
    )
