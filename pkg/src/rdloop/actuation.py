"""Actuator spatial profiles and assembly of the distributed source term.

Each device contributes a prescribed nonnegative space-time profile
g_j(x, t) = shape_j(x) * envelope_j(t); the assembled source is
sum_j g_j(x, t) * kappa_j(t), linear in the drive vector kappa.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import Field, Grid

SHAPE_KINDS = ("gaussian", "indicator")
ENVELOPE_KINDS = ("constant", "exp_decay")


@dataclass(frozen=True)
class ActuatorProfile:
    """One control device.

    ``gaussian``: amplitude * exp(-|x - center|^2 / (2 width^2)).
    ``indicator``: amplitude inside the ball |x - center| <= radius.
    The time envelope is 1 (``constant``) or exp(-rate*t) (``exp_decay``).
    """

    shape: str
    center: tuple[float, ...]
    amplitude: float
    width: float = 0.0  # gaussian std-dev or indicator radius
    envelope: str = "constant"
    envelope_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        problems = []
        if self.shape not in SHAPE_KINDS:
            problems.append(f"unknown actuator shape '{self.shape}'")
        if self.envelope not in ENVELOPE_KINDS:
            problems.append(f"unknown time envelope '{self.envelope}'")
        if self.amplitude < 0.0:
            problems.append("actuator amplitude must be nonnegative")
        if self.shape in SHAPE_KINDS and self.width <= 0.0:
            problems.append("actuator width/radius must be positive")
        if self.envelope == "exp_decay" and self.envelope_rate <= 0.0:
            problems.append("exp_decay envelope needs a positive rate")
        if problems:
            raise ConfigurationError(problems)

    def check_interior(self, grid: Grid) -> list[str]:
        problems = []
        if len(self.center) != grid.dim:
            problems.append(
                f"actuator center has {len(self.center)} coordinates "
                f"for a {grid.dim}D grid"
            )
            return problems
        for ax, (c, e) in enumerate(zip(self.center, grid.extents)):
            if not (0.0 < c < e):
                problems.append(
                    f"actuator center coordinate {c} on axis {ax} is not "
                    f"strictly inside (0, {e})"
                )
        return problems

    def spatial_values(self, grid: Grid) -> np.ndarray:
        coords = np.meshgrid(*grid.axes(), indexing="ij")
        d2 = sum((c - c0) ** 2 for c, c0 in zip(coords, self.center))
        if self.shape == "gaussian":
            return self.amplitude * np.exp(-d2 / (2.0 * self.width**2))
        return np.where(d2 <= self.width**2, self.amplitude, 0.0)

    def envelope_at(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        if self.envelope == "constant":
            out = np.ones_like(t)
        else:
            out = np.exp(-self.envelope_rate * t)
        return float(out) if out.ndim == 0 else out


class ActuatorBank:
    """Immutable collection of actuator profiles with cached grid samples."""

    def __init__(self, profiles):
        profiles = tuple(profiles)
        if not profiles:
            raise ConfigurationError("actuator bank needs at least one profile")
        self.profiles = profiles
        self._shape_cache: dict = {}

    @property
    def m(self) -> int:
        return len(self.profiles)

    def shapes_on(self, grid: Grid) -> np.ndarray:
        """Stacked spatial samples, shape (m, *grid.counts)."""
        cached = self._shape_cache.get(grid)
        if cached is None:
            cached = np.stack([p.spatial_values(grid) for p in self.profiles])
            self._shape_cache[grid] = cached
        return cached


def control_source(bank: ActuatorBank, kappa, t: float, grid: Grid) -> Field:
    """Assemble sum_j g_j(x, t) * kappa_j as a field on the grid."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (bank.m,):
        raise ConfigurationError(
            f"drive vector has {kappa.shape} entries for {bank.m} actuators"
        )
    shapes = bank.shapes_on(grid)
    env = np.array([p.envelope_at(t) for p in bank.profiles])
    weights = env * kappa
    values = np.tensordot(weights, shapes, axes=(0, 0))
    return Field(grid, values)


def lipschitz_bound(
    bank: ActuatorBank,
    grid: Grid,
    horizon: float,
    s_bound: float = 1.0,
    p: float | None = None,
    q: float = 2.0,
    time_samples: int = 201,
):
    """Quadrature values (c3, c4) for the source-term regularity bounds.

    c3 = sum_j ||g_j||_{L1(space x [0,T])}; with this value the
    L1 response to a drive change is bounded by
    c3 * sum_j max_t |dkappa_j|.  c4 bounds the mixed L^q-in-time /
    L^p-in-space norm of the source over drives with sup norm <= s_bound,
    computed as s_bound * sum_j ||g_j||_{L^q(L^p)}.
    """
    if p is None:
        p = float(grid.dim)
    w_space = grid.trapezoid_weights()
    ts = np.linspace(0.0, horizon, time_samples)
    w_t = np.full(time_samples, ts[1] - ts[0]) if time_samples > 1 else np.array([horizon])
    if time_samples > 1:
        w_t[0] *= 0.5
        w_t[-1] *= 0.5
    c3 = 0.0
    lq_sum = 0.0
    for profile, shape in zip(bank.profiles, bank.shapes_on(grid)):
        space_l1 = float(np.sum(w_space * np.abs(shape)))
        env = profile.envelope_at(ts)
        c3 += space_l1 * float(np.sum(w_t * np.abs(env)))
        space_lp = float(np.sum(w_space * np.abs(shape) ** p)) ** (1.0 / p)
        lq_sum += float(np.sum(w_t * np.abs(env * space_lp) ** q)) ** (1.0 / q)
    c4 = s_bound * lq_sum
    if c3 == 0.0:
        warnings.warn(
            "actuator bank has zero total mass; the drive-to-source map is "
            "degenerate (regularity bounds require positive constants)",
            stacklevel=2,
        )
    return c3, c4
