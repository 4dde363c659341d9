"""Point-sensor array: interior samples of the state and reference offsets."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .grid import Field, Grid, sample_at


class SensorArray:
    """Fixed interior measurement points with per-point reference values."""

    def __init__(self, points, references):
        points = [tuple(float(c) for c in np.atleast_1d(p)) for p in points]
        references = np.asarray(references, dtype=float)
        if not points:
            raise ConfigurationError("sensor array needs at least one point")
        if references.shape != (len(points),):
            raise ConfigurationError(
                f"{len(points)} sensor points but {references.shape} references"
            )
        self.points = points
        self.references = references

    @property
    def n(self) -> int:
        return len(self.points)

    def check_interior(self, grid: Grid) -> list[str]:
        problems = []
        for k, pt in enumerate(self.points):
            if len(pt) != grid.dim:
                problems.append(
                    f"sensor {k} has {len(pt)} coordinates for a {grid.dim}D grid"
                )
                continue
            for ax, (c, e, h) in enumerate(zip(pt, grid.extents, grid.spacing)):
                if not (c > h and c < e - h):
                    problems.append(
                        f"sensor {k} coordinate {c} on axis {ax} is not strictly "
                        f"interior (must lie in ({h}, {e - h}))"
                    )
        return problems


def read(array: SensorArray, field: Field) -> np.ndarray:
    """Sample the field at every sensor point."""
    return np.array([sample_at(field, pt) for pt in array.points])


def error_signal(array: SensorArray, readings) -> np.ndarray:
    """Component-wise readings minus references."""
    readings = np.asarray(readings, dtype=float)
    if readings.shape != (array.n,):
        raise PreconditionError(
            f"got {readings.shape} readings for {array.n} sensors"
        )
    return readings - array.references
