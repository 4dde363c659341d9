"""Reaction terms and the IMEX time step for the forced parabolic problem.

One step advances ``u`` by solving

    (I - dt * L) u_next = u + dt * (f(u) + source)

with ``L`` the insulated-boundary Laplacian: diffusion is implicit
(backward Euler), the reaction and the source term are explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import cg

from .errors import ConfigurationError, NumericalError, PreconditionError
from .grid import Field, Grid

REACTION_KINDS = ("zero", "linear", "allen_cahn")


@dataclass(frozen=True)
class ReactionTerm:
    """Pointwise reaction f(s).

    ``zero``: f = 0, ``linear``: f(s) = lam * s,
    ``allen_cahn``: the bistable f(s) = s - s**3.
    All built-in kinds satisfy f(0) = 0.
    """

    kind: str
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in REACTION_KINDS:
            raise ConfigurationError(
                f"unknown reaction kind '{self.kind}', expected one of {REACTION_KINDS}"
            )

    def __call__(self, s):
        return reaction_eval(self, s)

    def lipschitz_on(self, cap: float) -> float:
        """Lipschitz constant of f on [-cap, cap]."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear":
            return abs(self.lam)
        # |f'(s)| = |1 - 3 s^2| maximized at the ends of the range
        return max(1.0, abs(1.0 - 3.0 * cap * cap))

    def default_cert(self) -> "GrowthCert":
        if self.kind == "zero":
            return GrowthCert(0.0, 0.0)
        if self.kind == "linear":
            return GrowthCert(0.0, max(self.lam, 0.0))
        # s^2 - s^4 <= s^2 globally
        return GrowthCert(0.0, 1.0)


@dataclass(frozen=True)
class GrowthCert:
    """Constants certifying the one-sided growth bound f(s)*s <= c1 + c2*s^2."""

    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ConfigurationError("growth certificate constants must be nonnegative")


def reaction_eval(f: ReactionTerm, s):
    """Evaluate f pointwise (scalar or array)."""
    s = np.asarray(s, dtype=float)
    if f.kind == "zero":
        out = np.zeros_like(s)
    elif f.kind == "linear":
        out = f.lam * s
    else:
        out = s - s**3
    return float(out) if out.ndim == 0 else out


def growth_check(f: ReactionTerm, cert: GrowthCert, s_range, samples: int = 1001):
    """Sample the growth inequality over a range.

    Returns ``None`` on pass, or the first violating sample value.
    """
    lo, hi = float(s_range[0]), float(s_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise PreconditionError("growth check range must be finite")
    if samples < 2:
        raise PreconditionError("growth check needs at least 2 samples")
    s = np.linspace(lo, hi, samples)
    lhs = reaction_eval(f, s) * s
    rhs = cert.c1 + cert.c2 * s * s
    bad = lhs > rhs + 1e-12
    if np.any(bad):
        return float(s[np.argmax(bad)])
    return None


# Factorization-ready operators cached per (grid, dt); both are cheap to
# rebuild but a simulation reuses one thousands of times.
_BANDED_CACHE: dict = {}
_SPARSE_CACHE: dict = {}


def _banded_operator(grid: Grid, dt: float) -> np.ndarray:
    key = (grid, dt)
    ab = _BANDED_CACHE.get(key)
    if ab is None:
        (n,) = grid.counts
        (h,) = grid.spacing
        r = dt / (h * h)
        ab = np.zeros((3, n))
        ab[1, :] = 1.0 + 2.0 * r
        ab[0, 1:] = -r
        ab[2, :-1] = -r
        ab[0, 1] = -2.0 * r  # mirror ghost at the left boundary
        ab[2, -2] = -2.0 * r  # mirror ghost at the right boundary
        _BANDED_CACHE[key] = ab
    return ab


def _sparse_operator(grid: Grid, dt: float):
    """Symmetrized (I - dt*L) for the 2D solve.

    The mirror-ghost Laplacian is self-adjoint under trapezoid weights,
    so W @ A is symmetric positive definite with W the weight diagonal.
    Returns (W @ A, weight vector).
    """
    key = (grid, dt)
    cached = _SPARSE_CACHE.get(key)
    if cached is None:
        n0, n1 = grid.counts
        h0, h1 = grid.spacing

        def lap1d(n, h):
            main = np.full(n, -2.0)
            off = np.ones(n - 1)
            m = sp.diags([off, main, off], [-1, 0, 1], format="lil")
            m[0, 1] = 2.0
            m[-1, -2] = 2.0
            return (m / (h * h)).tocsr()

        lap = sp.kron(lap1d(n0, h0), sp.identity(n1)) + sp.kron(
            sp.identity(n0), lap1d(n1, h1)
        )
        a = sp.identity(n0 * n1) - dt * lap
        w = Grid(grid.extents, grid.counts).trapezoid_weights().ravel()
        wa = (sp.diags(w) @ a).tocsr()
        cached = (wa, w)
        _SPARSE_CACHE[key] = cached
    return cached


def pde_step(
    field: Field,
    dt: float,
    f: ReactionTerm,
    source: Field,
    linear_tol: float = 1e-10,
    max_iter: int = 2000,
) -> Field:
    """Advance the state by one IMEX step."""
    if dt <= 0.0:
        raise PreconditionError(f"time step must be positive, got {dt}")
    if source.grid != field.grid:
        raise PreconditionError("source field lives on a different grid")
    grid = field.grid
    rhs = field.values + dt * (reaction_eval(f, field.values) + source.values)
    if grid.dim == 1:
        ab = _banded_operator(grid, dt)
        next_values = solve_banded((1, 1), ab, rhs)
        return Field(grid, next_values)
    wa, w = _sparse_operator(grid, dt)
    b = rhs.ravel()
    wb = w * b
    x, _info = cg(
        wa, wb, x0=field.values.ravel(), rtol=linear_tol * 1e-2, atol=0.0,
        maxiter=max_iter,
    )
    bnorm = np.linalg.norm(b)
    residual = np.linalg.norm(wa @ x - wb) / np.linalg.norm(wb) if bnorm > 0 else 0.0
    if residual > linear_tol:
        raise NumericalError(
            f"conjugate gradient stalled at relative residual {residual:.3e} "
            f"(target {linear_tol:.1e}) after {max_iter} iterations",
            residual=residual,
        )
    return Field(grid, x.reshape(grid.counts))
