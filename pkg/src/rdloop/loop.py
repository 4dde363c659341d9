"""The coupled closed-loop solver.

Two routes to a discrete solution pair (u, kappa):

* ``simulate`` marches the loop in time with sample-and-hold ordering:
  actuate with the current drive, advance the PDE, sense, form the
  admissible set, select a power, update the drive.
* ``picard_solve`` iterates the composed map (solve PDE under a whole
  drive table, form admissible sets along it, select, re-integrate the
  drives) seeking a fixed point of the composition.

``residual`` measures how far a trajectory is from satisfying the
discrete inclusion, certifying solutions independently of the route that
produced them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actuation import ActuatorBank, control_source
from .controller import (
    BoundsReport,
    ControllerParams,
    a_priori_bounds,
    controller_step,
    controller_trajectory,
)
from .dynamics import GrowthCert, ReactionTerm, growth_check, pde_step
from .errors import ConfigurationError, PreconditionError
from .feedback import (
    AdmissibleInterval,
    RelaySpec,
    SelectionStrategy,
    WeightMatrix,
    admissible_set,
    select,
    weights_validate,
)
from .grid import Field, Grid
from .sensing import SensorArray, error_signal, read

DT_DIVISIBILITY_TOL = 1e-12


@dataclass
class Tolerances:
    picard_tol: float = 1e-6
    picard_max_iter: int = 50
    linear_solver_tol: float = 1e-10
    damping: float = 1.0  # 1.0 = undamped iteration


@dataclass
class SimConfig:
    """Full description of one closed-loop run."""

    grid: Grid
    horizon: float
    dt: float
    reaction: ReactionTerm
    cert: GrowthCert
    state_cap: float
    u0: Field
    bank: ActuatorBank
    sensors: SensorArray
    relays: RelaySpec
    alpha: WeightMatrix
    strategy: SelectionStrategy
    controller: ControllerParams
    tolerances: Tolerances = field(default_factory=Tolerances)
    snapshot_stride: int = 0  # 0 = auto (at most 64 snapshots)

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    def law_bounds(self) -> np.ndarray:
        """Per-device bound C_j of the relay law (row-stochastic weights)."""
        return np.ones(self.controller.m)

    def effective_stride(self) -> int:
        if self.snapshot_stride > 0:
            return self.snapshot_stride
        return max(1, int(np.ceil((self.n_steps + 1) / 64)))

    def validate(self) -> list[str]:
        """Collect every violated invariant (empty list = valid)."""
        problems = []
        if self.horizon <= 0.0:
            problems.append(f"horizon must be positive, got {self.horizon}")
        if self.dt <= 0.0:
            problems.append(f"dt must be positive, got {self.dt}")
        elif self.horizon > 0.0:
            n = self.horizon / self.dt
            if abs(n - round(n)) > DT_DIVISIBILITY_TOL * max(1.0, n):
                problems.append(
                    f"dt = {self.dt} does not divide the horizon {self.horizon}"
                )
        if self.u0.grid != self.grid:
            problems.append("initial field lives on a different grid")
        if self.state_cap <= 0.0:
            problems.append("state cap must be positive")
        violation = growth_check(
            self.reaction, self.cert, (-self.state_cap, self.state_cap)
        )
        if violation is not None:
            problems.append(
                f"reaction growth bound f(s)*s <= c1 + c2*s^2 fails at s = {violation}"
            )
        lip = self.reaction.lipschitz_on(self.state_cap)
        if self.dt > 0.0 and self.dt * lip > 0.5:
            problems.append(
                f"explicit reaction step unstable: dt * Lip(f) = {self.dt * lip:.3g} "
                "exceeds 0.5 on the declared state range"
            )
        wv = weights_validate(self.alpha)
        if wv is not None:
            j, t = wv
            row = self.alpha.at(t)[j]
            problems.append(
                f"weights row {j} at t = {t} is invalid (sum {float(np.sum(row)):.6g}; "
                "rows must be nonnegative and sum to 1)"
            )
        if self.alpha.m != self.controller.m:
            problems.append(
                f"weight matrix has {self.alpha.m} rows for {self.controller.m} devices"
            )
        if self.alpha.n != self.sensors.n:
            problems.append(
                f"weight matrix has {self.alpha.n} columns for {self.sensors.n} sensors"
            )
        if self.bank.m != self.controller.m:
            problems.append(
                f"{self.bank.m} actuator profiles for {self.controller.m} devices"
            )
        problems.extend(self.sensors.check_interior(self.grid))
        for profile in self.bank.profiles:
            problems.extend(profile.check_interior(self.grid))
        if self.tolerances.picard_max_iter < 1:
            problems.append("picard_max_iter must be at least 1")
        if not (0.0 < self.tolerances.damping <= 1.0):
            problems.append("damping must lie in (0, 1]")
        return problems

    def validated(self) -> "SimConfig":
        problems = self.validate()
        if problems:
            raise ConfigurationError(problems)
        return self


@dataclass
class Trajectory:
    """Recorded tables of one closed-loop run."""

    times: np.ndarray
    kappa: np.ndarray  # (steps + 1, m)
    v: np.ndarray  # (steps + 1, m); v[i] drives the step ending at t_i
    readings: np.ndarray  # (steps + 1, n)
    lo: np.ndarray  # (steps + 1, m) admissible interval endpoints
    hi: np.ndarray
    snapshots: list  # [(step index, field values array), ...]
    bounds: BoundsReport
    sup_abs_u: float

    def selection_defect(self) -> float:
        """Max distance of any recorded power from its admissible interval."""
        below = self.lo - self.v
        above = self.v - self.hi
        return float(max(np.max(below), np.max(above), 0.0))


@dataclass
class ResidualReport:
    iterations: int
    residual_history: list
    final_residual: float
    converged: bool


def _select_vector(intervals, strategy, previous):
    if previous is None:
        return np.array([select(w, strategy, None) for w in intervals])
    return np.array(
        [select(w, strategy, float(p)) for w, p in zip(intervals, previous)]
    )


def simulate(config: SimConfig) -> Trajectory:
    """March the closed loop over [0, horizon]."""
    config.validated()
    n_steps = config.n_steps
    times = config.times
    m, n = config.controller.m, config.sensors.n
    stride = config.effective_stride()
    tol = config.tolerances

    kappa = np.empty((n_steps + 1, m))
    v = np.empty((n_steps + 1, m))
    readings = np.empty((n_steps + 1, n))
    lo = np.empty((n_steps + 1, m))
    hi = np.empty((n_steps + 1, m))
    snapshots = []

    u = config.u0.copy()
    kappa[0] = config.controller.a_array()
    sup_abs_u = float(np.max(np.abs(u.values)))

    def record_feedback(i, previous):
        readings[i] = read(config.sensors, u)
        err = error_signal(config.sensors, readings[i])
        sets = admissible_set(config.relays, config.alpha, times[i], err)
        lo[i] = [w.lo for w in sets]
        hi[i] = [w.hi for w in sets]
        v[i] = _select_vector(sets, config.strategy, previous)

    record_feedback(0, None)
    snapshots.append((0, u.values.copy()))

    beta = config.controller.beta_array()
    for i in range(n_steps):
        source = control_source(config.bank, kappa[i], times[i], config.grid)
        u = pde_step(
            u, config.dt, config.reaction, source, linear_tol=tol.linear_solver_tol
        )
        sup_abs_u = max(sup_abs_u, float(np.max(np.abs(u.values))))
        record_feedback(i + 1, v[i])
        kappa[i + 1] = controller_step(kappa[i], v[i + 1], config.dt, beta)
        if (i + 1) % stride == 0 or i + 1 == n_steps:
            snapshots.append((i + 1, u.values.copy()))

    bounds = a_priori_bounds(config.controller, config.law_bounds())
    return Trajectory(times, kappa, v, readings, lo, hi, snapshots, bounds, sup_abs_u)


def _solve_under_drive(config: SimConfig, kappa_table: np.ndarray):
    """Solve the PDE under a fixed drive table and sense along the way.

    Returns (readings, lo, hi, v, snapshots, sup_abs_u) where v is the
    per-step selection from the admissible sets of this solve.
    """
    n_steps = config.n_steps
    times = config.times
    m, n = config.controller.m, config.sensors.n
    stride = config.effective_stride()
    tol = config.tolerances

    readings = np.empty((n_steps + 1, n))
    lo = np.empty((n_steps + 1, m))
    hi = np.empty((n_steps + 1, m))
    v = np.empty((n_steps + 1, m))
    snapshots = []

    u = config.u0.copy()
    sup_abs_u = float(np.max(np.abs(u.values)))

    def sense(i, previous):
        readings[i] = read(config.sensors, u)
        err = error_signal(config.sensors, readings[i])
        sets = admissible_set(config.relays, config.alpha, times[i], err)
        lo[i] = [w.lo for w in sets]
        hi[i] = [w.hi for w in sets]
        v[i] = _select_vector(sets, config.strategy, previous)

    sense(0, None)
    snapshots.append((0, u.values.copy()))
    for i in range(n_steps):
        source = control_source(config.bank, kappa_table[i], times[i], config.grid)
        u = pde_step(
            u, config.dt, config.reaction, source, linear_tol=tol.linear_solver_tol
        )
        sup_abs_u = max(sup_abs_u, float(np.max(np.abs(u.values))))
        sense(i + 1, v[i])
        if (i + 1) % stride == 0 or i + 1 == n_steps:
            snapshots.append((i + 1, u.values.copy()))
    return readings, lo, hi, v, snapshots, sup_abs_u


def picard_solve(config: SimConfig):
    """Iterate the composed sense/select/drive map on whole drive tables.

    Starts from the free-decay drive (zero supplied power).  Stops when
    successive tables agree to picard_tol in the sup norm or at the
    iteration cap.  Non-convergence is reported, not raised: with a
    strict relay the underlying map is genuinely set-valued and
    chattering between iterates is an expected outcome.
    """
    config.validated()
    tol = config.tolerances
    times = config.times
    beta = config.controller.beta_array()
    a = config.controller.a_array()
    kappa_table = np.exp(-times[:, None] / beta[None, :]) * a[None, :]

    history = []
    converged = False
    last = None
    for _ in range(tol.picard_max_iter):
        readings, lo, hi, v, snapshots, sup_abs_u = _solve_under_drive(
            config, kappa_table
        )
        kappa_next = controller_trajectory(config.controller, v[1:], config.dt)
        residual_i = float(np.max(np.abs(kappa_next - kappa_table)))
        history.append(residual_i)
        last = (readings, lo, hi, v, snapshots, sup_abs_u, kappa_next)
        if residual_i <= tol.picard_tol:
            kappa_table = kappa_next
            converged = True
            break
        theta = tol.damping
        kappa_table = (1.0 - theta) * kappa_table + theta * kappa_next

    readings, lo, hi, v, snapshots, sup_abs_u, kappa_next = last
    bounds = a_priori_bounds(config.controller, config.law_bounds())
    trajectory = Trajectory(
        times, kappa_next, v, readings, lo, hi, snapshots, bounds, sup_abs_u
    )
    report = ResidualReport(len(history), history, history[-1], converged)
    return trajectory, report


def residual(trajectory: Trajectory, config: SimConfig) -> float:
    """Inclusion defect of a trajectory, measured on the time grid.

    Re-solves the PDE under the trajectory's drive table and returns the
    larger of (a) the worst distance of the rate expression
    beta * dkappa/dt + kappa from the admissible interval re-formed along
    the re-solve, and (b) the sup distance between the trajectory's
    sensor readings and the re-solve's.  A value of order dt certifies a
    discrete solution of the coupled system.
    """
    n_steps = config.n_steps
    if trajectory.kappa.shape != (n_steps + 1, config.controller.m):
        raise PreconditionError("trajectory drive table does not match the config grid")
    if trajectory.readings.shape != (n_steps + 1, config.sensors.n):
        raise PreconditionError("trajectory readings do not match the config sensors")

    readings, lo, hi, _v, _snaps, _sup = _solve_under_drive(config, trajectory.kappa)
    u_defect = float(np.max(np.abs(readings - trajectory.readings)))

    beta = config.controller.beta_array()
    kappa = trajectory.kappa
    rate_expr = beta[None, :] * np.diff(kappa, axis=0) / config.dt + kappa[:-1]
    below = lo[1:] - rate_expr
    above = rate_expr - hi[1:]
    inclusion_defect = float(max(np.max(below), np.max(above), 0.0))
    return max(inclusion_defect, u_defect)


def affine_check(config: SimConfig, v1: np.ndarray, v2: np.ndarray, lam: float) -> float:
    """Deviation of the drive map from affinity on a convex combination."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape or v1.shape != (config.n_steps, config.controller.m):
        raise PreconditionError("power tables must both match the config time grid")
    p = controller_trajectory
    combined = p(config.controller, lam * v1 + (1.0 - lam) * v2, config.dt)
    split = lam * p(config.controller, v1, config.dt) + (1.0 - lam) * p(
        config.controller, v2, config.dt
    )
    return float(np.max(np.abs(combined - split)))
