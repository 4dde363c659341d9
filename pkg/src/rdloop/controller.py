"""First-order actuator drive dynamics solved exactly per step.

Each device obeys beta * kdot + kappa = v.  With the power v held
constant over a step the variation-of-constants formula gives the update
kappa_next = exp(-dt/beta) * kappa + (1 - exp(-dt/beta)) * v, so the
controller integration carries no time-discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PreconditionError


@dataclass(frozen=True)
class ControllerParams:
    """Per-device time constants and initial drive values."""

    beta: tuple[float, ...]
    a: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        problems = []
        if len(self.beta) != len(self.a):
            problems.append("beta and initial values must have the same length")
        if not self.beta:
            problems.append("at least one controller is required")
        for j, b in enumerate(self.beta):
            if b <= 0.0:
                problems.append(f"controller {j}: time constant must be positive, got {b}")
        if problems:
            raise ConfigurationError(problems)

    @property
    def m(self) -> int:
        return len(self.beta)

    def beta_array(self) -> np.ndarray:
        return np.asarray(self.beta)

    def a_array(self) -> np.ndarray:
        return np.asarray(self.a)


@dataclass(frozen=True)
class BoundsReport:
    """A-priori bounds on the drive and its rate under a bounded law."""

    kappa_bound: tuple[float, ...]
    rate_bound: tuple[float, ...]
    S: float
    formula_discrepancy: bool = False


def controller_step(kappa, v, dt: float, beta):
    """Exact one-step update with v held constant (scalar or vector)."""
    if dt <= 0.0:
        raise PreconditionError(f"time step must be positive, got {dt}")
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0):
        raise PreconditionError("time constants must be positive")
    decay = np.exp(-dt / beta)
    out = decay * np.asarray(kappa, dtype=float) + (1.0 - decay) * np.asarray(v, dtype=float)
    return float(out) if out.ndim == 0 else out


def controller_trajectory(params: ControllerParams, v: np.ndarray, dt: float) -> np.ndarray:
    """Integrate all devices under a sample-and-hold power table.

    ``v`` has shape (steps, m); v[i] is held over [t_i, t_{i+1}].
    Returns kappa of shape (steps + 1, m) with kappa[0] = a.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[1] != params.m:
        raise PreconditionError(
            f"power table shape {v.shape} does not match {params.m} controllers"
        )
    steps = v.shape[0]
    beta = params.beta_array()
    decay = np.exp(-dt / beta)
    kappa = np.empty((steps + 1, params.m))
    kappa[0] = params.a_array()
    for i in range(steps):
        kappa[i + 1] = decay * kappa[i] + (1.0 - decay) * v[i]
    return kappa


def a_priori_bounds(params: ControllerParams, C) -> BoundsReport:
    """Bounds |kappa_j| <= |a_j| + C_j, |kdot_j| <= (|a_j| + 2 C_j) / beta_j.

    S is the largest per-device sum of the two, the radius of the
    invariant set of drives under any selection bounded by C.
    """
    C = np.asarray(C, dtype=float)
    if C.shape != (params.m,):
        raise PreconditionError(f"law bounds shape {C.shape} for {params.m} devices")
    if np.any(C <= 0.0):
        raise PreconditionError("law bounds must be positive")
    a = np.abs(params.a_array())
    beta = params.beta_array()
    kb = a + C
    rb = (a + 2.0 * C) / beta
    S = float(np.max(kb + rb))
    return BoundsReport(
        kappa_bound=tuple(kb),
        rate_bound=tuple(rb),
        S=S,
        formula_discrepancy=bool(np.any(C != 1.0)),
    )


def in_M_S(
    kappa: np.ndarray,
    S: float,
    dt: float,
    params: ControllerParams | None = None,
    C=None,
) -> tuple[bool, str]:
    """Check a drive table against the sup and rate bounds of radius S.

    The rate is measured by difference quotients; the exact exponential
    step deviates from the instantaneous rate by O(dt), so a per-step
    curvature allowance C_j * dt / beta_j^2 is added when the device
    parameters are supplied.
    """
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 2:
        raise PreconditionError("drive table must have shape (steps + 1, m)")
    tol = np.full(kappa.shape[1], 1e-9)
    if params is not None and C is not None:
        C = np.asarray(C, dtype=float)
        tol = tol + C * dt / params.beta_array() ** 2
    sup = np.max(np.abs(kappa), axis=0)
    if np.any(sup > S + 1e-9):
        j = int(np.argmax(sup))
        return False, f"device {j}: sup |kappa| = {sup[j]:.6g} exceeds S = {S:.6g}"
    if kappa.shape[0] > 1:
        quot = np.max(np.abs(np.diff(kappa, axis=0)) / dt, axis=0)
        if np.any(quot > S + tol):
            j = int(np.argmax(quot - tol))
            return False, (
                f"device {j}: difference quotient {quot[j]:.6g} exceeds "
                f"S = {S:.6g} (+ allowance {tol[j]:.2e})"
            )
    return True, "within bounds"
