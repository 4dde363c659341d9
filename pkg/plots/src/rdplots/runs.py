"""Loaders for the run-directory artifact schema.

Every loader is read-only and lossless: values come back exactly as the
17-significant-digit CSV text parses, with no rounding or resampling.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import NoDataError, SchemaError

_SNAP_NAME = re.compile(r"^step_(\d{6})\.csv$")


def load_table(run: Path, name: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Load one CSV as {column name: float array}.

    ``required`` columns must be present by exact header name; any number
    of additional columns (e.g. kappa_2, kappa_3 for multi-device runs)
    is returned as well.
    """
    path = Path(run) / name
    if not path.exists():
        raise SchemaError(f"{name}: file not found in run directory {run}")
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise NoDataError(f"{name}: empty file")
        columns = header.split(",")
        body = fh.read()
        if not body.strip():
            raise NoDataError(f"{name}: header only, no rows")
        data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    for col in required:
        if col not in columns:
            raise SchemaError(f"{name}: missing column '{col}' (found {columns})")
    if data.shape[1] != len(columns):
        raise SchemaError(
            f"{name}: {len(columns)} header columns but {data.shape[1]} data columns"
        )
    return {col: data[:, i] for i, col in enumerate(columns)}


def series_columns(table: dict[str, np.ndarray], prefix: str) -> list[str]:
    """Names like kappa_1, kappa_2, ... in index order."""
    pat = re.compile(rf"^{re.escape(prefix)}_(\d+)$")
    found = sorted(
        (int(m.group(1)), col) for col in table for m in [pat.match(col)] if m
    )
    return [col for _idx, col in found]


def load_report(run: Path) -> dict:
    path = Path(run) / "report.json"
    if not path.exists():
        raise SchemaError(f"report.json: file not found in run directory {run}")
    with open(path) as fh:
        return json.load(fh)


def load_snapshots(run: Path) -> tuple[list[int], np.ndarray, np.ndarray]:
    """All snapshot fields of a 1D run.

    Returns (step indices, node coordinates, values with shape
    (n_snapshots, n_nodes)).
    """
    snap_dir = Path(run) / "snapshots"
    if not snap_dir.is_dir():
        raise SchemaError(f"snapshots/: directory not found in run directory {run}")
    steps = []
    for p in snap_dir.iterdir():
        m = _SNAP_NAME.match(p.name)
        if m:
            steps.append(int(m.group(1)))
    if not steps:
        raise NoDataError(f"snapshots/: no step_*.csv files in {snap_dir}")
    steps.sort()
    x = None
    fields = []
    for step in steps:
        table = load_table(snap_dir, f"step_{step:06d}.csv", ("index", "x", "value"))
        if "y" in table:
            raise SchemaError(
                "snapshots: 2D runs are not supported by the 1D figure kinds"
            )
        if x is None:
            x = table["x"]
        elif not np.array_equal(x, table["x"]):
            raise SchemaError(f"step_{step:06d}.csv: node coordinates differ between snapshots")
        fields.append(table["value"])
    return steps, x, np.stack(fields)
