"""Command-line entry point: run orchestration and deterministic outputs.

Subcommands: validate, simulate, picard, residual, verify <probe>, sweep.
Each run writes a manifest plus CSV tables (17-significant-digit floats,
lossless round-trip) and a JSON report into the output directory.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 fixed-point iteration did not converge (only with --strict).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time as time_mod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import apply_overrides, config_hash, load_config, parse_config
from .errors import ConfigurationError, NumericalError
from .loop import SimConfig, Trajectory, picard_solve, residual, simulate
from .verify import convergence_study, heat_oracle, holder_probe, stability_probe

FLOAT_FMT = "%.17g"
PROBES = ("heat", "stability", "holder", "convergence")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(FLOAT_FMT % col[i] for col in columns) + "\n")


def write_trajectory(out: Path, trajectory: Trajectory, config: SimConfig) -> list[str]:
    """Write kappa/v/readings CSVs and snapshot files; returns the paths."""
    paths = []
    t = trajectory.times
    for name, table, prefix in (
        ("kappa.csv", trajectory.kappa, "kappa"),
        ("v.csv", trajectory.v, "v"),
        ("readings.csv", trajectory.readings, "r"),
    ):
        header = ["t"] + [f"{prefix}_{j + 1}" for j in range(table.shape[1])]
        _write_csv(out / name, header, [t] + [table[:, j] for j in range(table.shape[1])])
        paths.append(name)

    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    axes = config.grid.axes()
    if config.grid.dim == 1:
        coords = [axes[0]]
        coord_names = ["x"]
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = [m.ravel() for m in mesh]
        coord_names = ["x", "y"]
    index = np.arange(config.grid.node_count, dtype=float)
    for step, values in trajectory.snapshots:
        name = f"snapshots/step_{step:06d}.csv"
        _write_csv(
            out / name,
            ["index"] + coord_names + ["value"],
            [index] + coords + [values.ravel()],
        )
        paths.append(name)
    return paths


def _report_payload(trajectory: Trajectory, config: SimConfig) -> dict:
    return {
        "bounds": dataclasses.asdict(trajectory.bounds),
        "references": [float(r) for r in config.sensors.references],
        "sup_abs_u": trajectory.sup_abs_u,
        "selection_defect": trajectory.selection_defect(),
    }


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: Path, subcommand: str, digest: str, paths: list[str], started: float) -> None:
    _write_json(
        out / "manifest.json",
        {
            "artifact_version": __version__,
            "config_hash": digest,
            "subcommand": subcommand,
            "outputs": sorted(paths),
            "wall_clock_seconds": round(time_mod.monotonic() - started, 3),
        },
    )


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> tuple[SimConfig, dict, str]:
    cfg, raw, digest = load_config(args.config)
    if args.stride is not None:
        cfg.snapshot_stride = args.stride
    problems = cfg.validate()
    if problems:
        raise ConfigurationError(problems)
    return cfg, raw, digest


def cmd_validate(args) -> int:
    started = time_mod.monotonic()
    _cfg, _raw, digest = _load(args)
    out = _prepare_out(args)
    _write_manifest(out, "validate", digest, [], started)
    print(f"config OK (hash {digest})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time_mod.monotonic()
    cfg, _raw, digest = _load(args)
    out = _prepare_out(args)
    trajectory = simulate(cfg)
    paths = write_trajectory(out, trajectory, cfg)
    report = _report_payload(trajectory, cfg)
    report["residual"] = residual(trajectory, cfg)
    _write_json(out / "report.json", report)
    paths.append("report.json")
    _write_manifest(out, "simulate", digest, paths, started)
    return EXIT_OK


def cmd_picard(args) -> int:
    started = time_mod.monotonic()
    cfg, _raw, digest = _load(args)
    out = _prepare_out(args)
    trajectory, rr = picard_solve(cfg)
    paths = write_trajectory(out, trajectory, cfg)
    report = _report_payload(trajectory, cfg)
    report["picard"] = {
        "iterations": rr.iterations,
        "residual_history": rr.residual_history,
        "final_residual": rr.final_residual,
        "converged": rr.converged,
    }
    _write_json(out / "report.json", report)
    paths.append("report.json")
    _write_manifest(out, "picard", digest, paths, started)
    if not rr.converged and args.strict:
        print(
            f"fixed-point iteration did not converge "
            f"(final residual {rr.final_residual:.3e})",
            file=sys.stderr,
        )
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_residual(args) -> int:
    started = time_mod.monotonic()
    cfg, _raw, digest = _load(args)
    out = _prepare_out(args)
    trajectory = simulate(cfg)
    paths = write_trajectory(out, trajectory, cfg)
    report = _report_payload(trajectory, cfg)
    report["residual"] = residual(trajectory, cfg)
    _write_json(out / "report.json", report)
    paths.append("report.json")
    _write_manifest(out, "residual", digest, paths, started)
    print(f"residual = {report['residual']:.6e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time_mod.monotonic()
    out = _prepare_out(args)
    if args.probe == "heat":
        probe = heat_oracle()
        digest = "builtin"
        paths = []
    else:
        cfg, _raw, digest = _load(args)
        if args.probe == "stability":
            probe = stability_probe(cfg, pairs=args.pairs, seed=args.seed)
            paths = []
        elif args.probe == "holder":
            cfg.snapshot_stride = 1
            trajectory = simulate(cfg)
            probe = holder_probe(trajectory, cfg, seed=args.seed)
            paths = write_trajectory(out, trajectory, cfg)
        else:
            probe = convergence_study(cfg, levels=args.levels)
            paths = []
    _write_json(out / "report.json", probe.as_dict())
    paths.append("report.json")
    _write_manifest(out, f"verify {args.probe}", digest, paths, started)
    print(f"{probe.name}: {'pass' if probe.passed else 'FAIL'} ({probe.tolerance})")
    return EXIT_OK if probe.passed else EXIT_NUMERICAL


def _run_sweep_case(base_raw: dict, overrides: dict, case_dir: Path, stride) -> dict:
    raw = apply_overrides(base_raw, overrides)
    raw.pop("sweep", None)
    cfg = parse_config(raw)
    if stride is not None:
        cfg.snapshot_stride = stride
    problems = cfg.validate()
    if problems:
        raise ConfigurationError(problems)
    case_dir.mkdir(parents=True, exist_ok=True)
    started = time_mod.monotonic()
    trajectory = simulate(cfg)
    paths = write_trajectory(case_dir, trajectory, cfg)
    report = _report_payload(trajectory, cfg)
    report["residual"] = residual(trajectory, cfg)
    _write_json(case_dir / "report.json", report)
    paths.append("report.json")
    digest = config_hash(raw)
    _write_manifest(case_dir, "simulate", digest, paths, started)
    return {"dir": case_dir.name, "config_hash": digest, "residual": report["residual"]}


def cmd_sweep(args) -> int:
    started = time_mod.monotonic()
    _cfg, raw, digest = _load(args)
    cases = raw.get("sweep")
    if not isinstance(cases, list) or not cases:
        raise ConfigurationError("sweep: config must contain a non-empty 'sweep' list")
    out = _prepare_out(args)
    jobs = [
        (case, out / f"run_{i:03d}")
        for i, case in enumerate(cases)
    ]
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        results = list(
            pool.map(
                lambda job: _run_sweep_case(raw, job[0], job[1], args.stride), jobs
            )
        )
    _write_json(out / "report.json", {"cases": results})
    _write_manifest(
        out, "sweep", digest, [r["dir"] for r in results] + ["report.json"], started
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdloop",
        description="Closed-loop reaction-diffusion simulator and validation probes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to a YAML run config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--stride", type=int, default=None, help="snapshot stride")

    for name, fn in (
        ("validate", cmd_validate),
        ("simulate", cmd_simulate),
        ("residual", cmd_residual),
    ):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("picard")
    add_common(p)
    p.add_argument("--strict", action="store_true",
                   help="exit 4 when the fixed-point iteration does not converge")
    p.set_defaults(fn=cmd_picard)

    p = sub.add_parser("verify")
    p.add_argument("probe", choices=PROBES)
    p.add_argument("--config", default=None, help="config (unused for 'heat')")
    p.add_argument("--out", required=True)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sweep")
    add_common(p)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print("configuration invalid:", file=sys.stderr)
        for violation in exc.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
