"""The multivalued feedback law.

Relays map a scalar error to a set of admissible drive powers; rows of a
time-dependent stochastic weight matrix combine the per-sensor relays
into one closed interval per actuator.  A selection strategy then picks
a single value from each interval, turning the set-valued law into a
concrete (piecewise-constant, hence measurable) signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PreconditionError

RELAY_MODES = ("strict", "convexified", "smoothed")
STRATEGY_KINDS = (
    "midpoint",
    "prefer_zero",
    "prefer_previous",
    "extreme_lo",
    "extreme_hi",
    "hysteresis",
)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class AdmissibleInterval:
    """A closed interval of admissible drive powers."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise PreconditionError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise PreconditionError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, v: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class RelaySpec:
    """Switching law at a single sensor.

    ``strict``: single-valued sign switch taking -1 / 0 / +1.
    ``convexified``: same except the jump at zero is filled with [-1, 1].
    ``smoothed``: single-valued -clamp(r / delta, -1, 1), Lipschitz with
    constant 1/delta.
    """

    mode: str
    delta: float = 0.0

    def __post_init__(self):
        if self.mode not in RELAY_MODES:
            raise ConfigurationError(f"unknown relay mode '{self.mode}'")
        if self.mode == "smoothed" and self.delta <= 0.0:
            raise ConfigurationError("smoothed relay needs delta > 0")


def relay(spec: RelaySpec, r: float) -> AdmissibleInterval:
    """Admissible power set for one error value."""
    if not np.isfinite(r):
        raise PreconditionError(f"relay input must be finite, got {r}")
    if spec.mode == "smoothed":
        v = -float(np.clip(r / spec.delta, -1.0, 1.0))
        return AdmissibleInterval(v, v)
    if r > 0.0:
        return AdmissibleInterval(-1.0, -1.0)
    if r < 0.0:
        return AdmissibleInterval(1.0, 1.0)
    if spec.mode == "strict":
        return AdmissibleInterval(0.0, 0.0)
    return AdmissibleInterval(-1.0, 1.0)


class WeightMatrix:
    """m x n row-stochastic weights, piecewise linear in time.

    Stored as breakpoint tables: ``times`` (K,) ascending over [0, T] and
    ``values`` (K, m, n).  Rows that sum to one at every breakpoint sum
    to one everywhere by linearity of the interpolation.
    """

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.size < 1:
            raise ConfigurationError("weight matrix needs at least one breakpoint")
        if np.any(np.diff(self.times) <= 0.0):
            raise ConfigurationError("weight breakpoints must be strictly increasing")
        if self.values.ndim != 3 or self.values.shape[0] != self.times.size:
            raise ConfigurationError(
                "weight values must have shape (breakpoints, m, n)"
            )

    @classmethod
    def constant(cls, rows) -> "WeightMatrix":
        rows = np.asarray(rows, dtype=float)
        return cls(np.array([0.0]), rows[np.newaxis, :, :])

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return self.values.shape[2]

    def at(self, t: float) -> np.ndarray:
        """Interpolated m x n matrix at time t (clamped to the table ends)."""
        ts = self.times
        if t <= ts[0]:
            return self.values[0]
        if t >= ts[-1]:
            return self.values[-1]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        lam = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1.0 - lam) * self.values[i] + lam * self.values[i + 1]


def weights_validate(alpha: WeightMatrix):
    """Check nonnegativity and unit row sums at every breakpoint.

    Returns ``None`` on pass or the first violating (row, breakpoint time).
    """
    for ti, mat in zip(alpha.times, alpha.values):
        for j in range(alpha.m):
            row = mat[j]
            if np.any(row < -ROW_SUM_TOL):
                return j, float(ti)
            if abs(float(np.sum(row)) - 1.0) > ROW_SUM_TOL:
                return j, float(ti)
    return None


def admissible_set(
    relays: RelaySpec, alpha: WeightMatrix, t: float, err
) -> list[AdmissibleInterval]:
    """Per-actuator admissible intervals at time t.

    Each interval is the weighted Minkowski sum of the per-sensor relay
    sets; with nonnegative weights the endpoints combine directly.
    """
    err = np.asarray(err, dtype=float)
    if err.shape != (alpha.n,):
        raise PreconditionError(
            f"error signal has {err.shape} entries for {alpha.n} sensors"
        )
    sets = [relay(relays, r) for r in err]
    los = np.array([s.lo for s in sets])
    his = np.array([s.hi for s in sets])
    mat = alpha.at(t)
    return [
        AdmissibleInterval(float(mat[j] @ los), float(mat[j] @ his))
        for j in range(alpha.m)
    ]


@dataclass(frozen=True)
class SelectionStrategy:
    """Deterministic rule picking one value from an admissible interval."""

    kind: str
    band: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ConfigurationError(f"unknown selection strategy '{self.kind}'")
        if self.kind == "hysteresis" and self.band <= 0.0:
            raise ConfigurationError("hysteresis strategy needs band > 0")


def select(
    interval: AdmissibleInterval,
    strategy: SelectionStrategy,
    previous: float | None = None,
) -> float:
    """Pick a value inside the interval according to the strategy."""
    lo, hi = interval.lo, interval.hi
    mid = 0.5 * (lo + hi)
    kind = strategy.kind
    if kind == "midpoint":
        return mid
    if kind == "extreme_lo":
        return lo
    if kind == "extreme_hi":
        return hi
    if kind == "prefer_zero":
        return float(np.clip(0.0, lo, hi))
    if kind == "prefer_previous":
        if previous is None:
            return mid
        return float(np.clip(previous, lo, hi))
    # hysteresis: keep the previous value while it stays near the set
    if previous is not None and lo - strategy.band <= previous <= hi + strategy.band:
        return float(np.clip(previous, lo, hi))
    return mid
