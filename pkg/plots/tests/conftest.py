"""Build real run directories once per session via the simulator CLI.

The plotting package is exercised only against the documented artifacts,
exactly as an end user would produce them.
"""

import subprocess
from pathlib import Path

import pytest

CONFIG_DIR = Path(__file__).resolve().parent.parent.parent / "configs"


def _cli(*argv):
    proc = subprocess.run(
        ["rdloop", *map(str, argv)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    out = {}
    for name, argv in {
        "zero": ("simulate", "--config", CONFIG_DIR / "zero.yaml"),
        "heat": ("simulate", "--config", CONFIG_DIR / "heat.yaml"),
        "regulation": ("simulate", "--config", CONFIG_DIR / "regulation.yaml"),
        "picard": ("picard", "--config", CONFIG_DIR / "picard_smoothed.yaml"),
        "convergence": (
            "verify", "convergence", "--config", CONFIG_DIR / "zero.yaml",
        ),
    }.items():
        out[name] = base / name
        _cli(*argv, "--out", out[name])
    return out
