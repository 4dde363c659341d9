"""The five figure kinds rendered from run-directory artifacts."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import NoDataError, SchemaError
from .runs import load_report, load_snapshots, load_table, series_columns

KINDS = (
    "field_evolution",
    "controller_traces",
    "sensor_tracking",
    "residual_decay",
    "convergence_order",
)

FIGSIZE = (8.0, 5.0)
DPI = 120


@dataclass(frozen=True)
class PlotJob:
    run: Path
    kind: str
    out: Path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind '{self.kind}' (choose from {KINDS})")


def _times(run: Path) -> np.ndarray:
    return load_table(run, "kappa.csv", ("t",))["t"]


def _save(fig, out: Path) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return out


def _field_evolution(run: Path):
    steps, x, values = load_snapshots(run)
    t_all = _times(run)
    try:
        snap_t = t_all[np.asarray(steps)]
    except IndexError as exc:
        raise SchemaError("snapshots reference steps beyond the kappa.csv time grid") from exc
    fig, (ax_map, ax_prof) = plt.subplots(
        1, 2, figsize=FIGSIZE, gridspec_kw={"width_ratios": [2, 1]}
    )
    mesh = ax_map.pcolormesh(x, snap_t, values, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax_map, label="u(x, t)")
    ax_map.set_xlabel("x  [domain units]")
    ax_map.set_ylabel("t  [s]")
    ax_map.set_title("state evolution")
    for i in (0, len(steps) // 2, len(steps) - 1):
        ax_prof.plot(x, values[i], label=f"t = {snap_t[i]:.3g} s")
    ax_prof.set_xlabel("x  [domain units]")
    ax_prof.set_ylabel("u")
    ax_prof.legend(fontsize=8)
    ax_prof.set_title("profiles")
    fig.tight_layout()
    return fig


def _controller_traces(run: Path):
    kap = load_table(run, "kappa.csv", ("t", "kappa_1"))
    vtab = load_table(run, "v.csv", ("t", "v_1"))
    report = load_report(run)
    kappa_bound = report.get("bounds", {}).get("kappa_bound")
    fig, (ax_k, ax_v) = plt.subplots(2, 1, figsize=FIGSIZE, sharex=True)
    for j, col in enumerate(series_columns(kap, "kappa")):
        ax_k.plot(kap["t"], kap[col], label=col)
        if kappa_bound is not None and j < len(kappa_bound):
            for sign in (1.0, -1.0):
                ax_k.axhline(sign * kappa_bound[j], ls=":", lw=0.8, color="gray")
    ax_k.set_ylabel("drive κ_j")
    ax_k.legend(fontsize=8)
    # the relay law bounds every selected power by 1 in magnitude
    for col in series_columns(vtab, "v"):
        ax_v.step(vtab["t"], vtab[col], where="post", label=col)
    for sign in (1.0, -1.0):
        ax_v.axhline(sign, ls="--", lw=0.8, color="gray")
    ax_v.set_ylim(-1.15, 1.15)
    ax_v.set_ylabel("selected power v_j")
    ax_v.set_xlabel("t  [s]")
    ax_v.legend(fontsize=8)
    fig.suptitle("controller traces with admissibility envelopes")
    fig.tight_layout()
    return fig


def _sensor_tracking(run: Path):
    table = load_table(run, "readings.csv", ("t", "r_1"))
    report = load_report(run)
    references = report.get("references")
    if references is None:
        raise SchemaError("report.json: missing key 'references' needed for sensor plots")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    cols = series_columns(table, "r")
    for k, col in enumerate(cols):
        (line,) = ax.plot(table["t"], table[col], label=f"sensor {k + 1}")
        if k < len(references):
            ax.axhline(
                references[k], ls="--", lw=0.9, color=line.get_color(),
                label=f"target u*_{k + 1} = {references[k]:g}",
            )
    ax.set_xlabel("t  [s]")
    ax.set_ylabel("sensor reading u(x_k, t)")
    ax.set_title("sensor tracking")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _residual_decay(run: Path):
    report = load_report(run)
    picard = report.get("picard")
    if picard is None:
        raise NoDataError(
            "report.json: no 'picard' block — this figure needs a fixed-point run"
        )
    history = picard.get("residual_history", [])
    if not history:
        raise NoDataError("report.json: empty residual history")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.semilogy(np.arange(1, len(history) + 1), history, marker="o")
    ax.axhline(history[-1], ls=":", lw=0.8, color="gray")
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup-norm drive-table residual")
    tag = "converged" if picard.get("converged") else "not converged"
    ax.set_title(f"fixed-point residual decay ({tag})")
    fig.tight_layout()
    return fig


def _convergence_order(run: Path):
    report = load_report(run)
    if report.get("name") != "convergence_study":
        raise NoDataError(
            "report.json: this figure needs a refinement-study run "
            f"(found '{report.get('name', 'simulation')}')"
        )
    measured = report["measured"]
    residuals = measured.get("residuals", [])
    errors = measured.get("final_errors", [])
    dists = measured.get("kappa_dists", [])
    if not residuals:
        raise NoDataError("report.json: refinement study holds no residuals")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    factors = 2.0 ** np.arange(len(residuals))
    floor = 1e-16

    def draw(series, label, marker):
        vals = np.maximum(np.asarray(series, dtype=float), floor)
        ax.loglog(factors[: len(vals)], vals, marker=marker, label=label)

    draw(residuals, "inclusion residual", "o")
    if errors:
        draw(errors, "final-field error vs finest", "s")
    if dists:
        draw(dists, "drive-table gap to next level", "^")
    ref = np.maximum(np.asarray(residuals, dtype=float), floor)
    ax.loglog(factors, ref[0] / factors, ls="--", color="gray", label="first order")
    ax.set_xlabel("refinement factor (space and time)")
    ax.set_ylabel("max-norm measure")
    ax.set_title("joint refinement study")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


_RENDERERS = {
    "field_evolution": _field_evolution,
    "controller_traces": _controller_traces,
    "sensor_tracking": _sensor_tracking,
    "residual_decay": _residual_decay,
    "convergence_order": _convergence_order,
}


def render(job: PlotJob) -> Path:
    """Render one figure from a run directory; returns the written path."""
    fig = _RENDERERS[job.kind](Path(job.run))
    return _save(fig, job.out)
