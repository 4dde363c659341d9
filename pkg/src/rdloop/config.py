"""Run configuration: strict YAML parsing into a validated SimConfig.

One file fully determines a run.  Every key is either consumed or
rejected, so typos fail loudly instead of silently falling back to a
default.  Keys carrying physical quantities name their unit
(``dt_seconds``, ``t_final_seconds``).
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
import yaml

from .actuation import ActuatorBank, ActuatorProfile
from .controller import ControllerParams
from .dynamics import GrowthCert, ReactionTerm
from .errors import ConfigurationError
from .feedback import RelaySpec, SelectionStrategy, WeightMatrix
from .grid import Field, Grid
from .loop import SimConfig, Tolerances
from .sensing import SensorArray

TOP_LEVEL_KEYS = {
    "grid",
    "time",
    "reaction",
    "initial",
    "actuators",
    "sensors",
    "feedback",
    "controller",
    "tolerances",
    "snapshots",
    "sweep",
}


def _require_mapping(node, where: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigurationError(f"{where}: expected a mapping, got {type(node).__name__}")
    return node


def _take(node: dict, where: str, required, optional=()):
    """Pop required/optional keys; reject anything left over."""
    out = {}
    problems = []
    node = dict(node)
    for key in required:
        if key not in node:
            problems.append(f"{where}: missing required key '{key}'")
        else:
            out[key] = node.pop(key)
    for key in optional:
        if key in node:
            out[key] = node.pop(key)
    for key in node:
        problems.append(f"{where}: unknown key '{key}'")
    if problems:
        raise ConfigurationError(problems)
    return out


def config_hash(raw: dict) -> str:
    """Stable digest of the parsed tree (key order independent)."""
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _build_initial(spec: dict, grid: Grid) -> Field:
    spec = _take(spec, "initial", ["kind"], ["value", "values"])
    kind = spec["kind"]
    if kind == "constant":
        return Field.constant(grid, float(spec.get("value", 0.0)))
    if kind == "cosine":
        amp = float(spec.get("value", 1.0))
        if grid.dim == 1:
            return Field.from_function(grid, lambda x: amp * np.cos(np.pi * x / grid.extents[0]))
        return Field.from_function(
            grid,
            lambda x, y: amp
            * np.cos(np.pi * x / grid.extents[0])
            * np.cos(np.pi * y / grid.extents[1]),
        )
    if kind == "nodes":
        if "values" not in spec:
            raise ConfigurationError("initial: kind 'nodes' requires 'values'")
        return Field(grid, np.asarray(spec["values"], dtype=float))
    raise ConfigurationError(f"initial: unknown kind '{kind}'")


def _build_weights(spec, m: int, n: int) -> WeightMatrix:
    if spec is None:
        # uniform row-stochastic default
        return WeightMatrix.constant(np.full((m, n), 1.0 / n))
    spec = _take(_require_mapping(spec, "feedback.weights"), "feedback.weights",
                 ["kind"], ["rows", "times", "values"])
    if spec["kind"] == "constant":
        return WeightMatrix.constant(np.asarray(spec["rows"], dtype=float))
    if spec["kind"] == "breakpoints":
        return WeightMatrix(
            np.asarray(spec["times"], dtype=float),
            np.asarray(spec["values"], dtype=float),
        )
    raise ConfigurationError(f"feedback.weights: unknown kind '{spec['kind']}'")


def parse_config(raw: dict) -> SimConfig:
    """Build a SimConfig from a parsed YAML tree (without validating physics)."""
    raw = _require_mapping(raw, "top level")
    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigurationError(
            [f"top level: unknown key '{k}'" for k in sorted(unknown)]
        )
    problems = []
    for key in ("grid", "time", "reaction", "initial", "actuators", "sensors",
                "feedback", "controller"):
        if key not in raw:
            problems.append(f"top level: missing required section '{key}'")
    if problems:
        raise ConfigurationError(problems)

    g = _take(_require_mapping(raw["grid"], "grid"), "grid", ["extents", "counts"])
    grid = Grid(tuple(g["extents"]), tuple(g["counts"]))

    t = _take(_require_mapping(raw["time"], "time"), "time",
              ["t_final_seconds", "dt_seconds"])
    horizon = float(t["t_final_seconds"])
    dt = float(t["dt_seconds"])

    r = _take(_require_mapping(raw["reaction"], "reaction"), "reaction",
              ["kind"], ["lambda", "state_cap", "growth_c1", "growth_c2"])
    reaction = ReactionTerm(r["kind"], lam=float(r.get("lambda", 0.0)))
    cert = (
        GrowthCert(float(r["growth_c1"]), float(r["growth_c2"]))
        if "growth_c1" in r or "growth_c2" in r
        else reaction.default_cert()
    )
    state_cap = float(r.get("state_cap", 2.0))

    u0 = _build_initial(_require_mapping(raw["initial"], "initial"), grid)

    if not isinstance(raw["actuators"], list) or not raw["actuators"]:
        raise ConfigurationError("actuators: expected a non-empty list")
    profiles = []
    for i, node in enumerate(raw["actuators"]):
        spec = _take(
            _require_mapping(node, f"actuators[{i}]"),
            f"actuators[{i}]",
            ["shape", "center", "amplitude", "width"],
            ["envelope", "envelope_rate"],
        )
        profiles.append(
            ActuatorProfile(
                shape=spec["shape"],
                center=tuple(np.atleast_1d(spec["center"])),
                amplitude=float(spec["amplitude"]),
                width=float(spec["width"]),
                envelope=spec.get("envelope", "constant"),
                envelope_rate=float(spec.get("envelope_rate", 0.0)),
            )
        )
    bank = ActuatorBank(profiles)

    s = _take(_require_mapping(raw["sensors"], "sensors"), "sensors",
              ["points", "references"])
    sensors = SensorArray(s["points"], s["references"])

    fb = _take(_require_mapping(raw["feedback"], "feedback"), "feedback",
               ["relay", "strategy"], ["delta", "band", "weights"])
    relays = RelaySpec(fb["relay"], delta=float(fb.get("delta", 0.0)))
    strategy = SelectionStrategy(fb["strategy"], band=float(fb.get("band", 0.0)))
    alpha = _build_weights(fb.get("weights"), m=bank.m, n=sensors.n)

    c = _take(_require_mapping(raw["controller"], "controller"), "controller",
              ["beta", "initial"])
    controller = ControllerParams(tuple(c["beta"]), tuple(c["initial"]))

    tol_spec = _take(
        _require_mapping(raw.get("tolerances", {}) or {}, "tolerances"),
        "tolerances",
        [],
        ["picard_tol", "picard_max_iter", "linear_solver_tol", "damping"],
    )
    tolerances = Tolerances(
        picard_tol=float(tol_spec.get("picard_tol", 1e-6)),
        picard_max_iter=int(tol_spec.get("picard_max_iter", 50)),
        linear_solver_tol=float(tol_spec.get("linear_solver_tol", 1e-10)),
        damping=float(tol_spec.get("damping", 1.0)),
    )

    snap = _take(
        _require_mapping(raw.get("snapshots", {}) or {}, "snapshots"),
        "snapshots", [], ["stride"],
    )
    stride = int(snap.get("stride", 0))

    return SimConfig(
        grid=grid,
        horizon=horizon,
        dt=dt,
        reaction=reaction,
        cert=cert,
        state_cap=state_cap,
        u0=u0,
        bank=bank,
        sensors=sensors,
        relays=relays,
        alpha=alpha,
        strategy=strategy,
        controller=controller,
        tolerances=tolerances,
        snapshot_stride=stride,
    )


def load_config(path: str):
    """Read and parse a config file.  Returns (SimConfig, raw tree, hash)."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raise ConfigurationError(f"{path}: empty config file")
    cfg = parse_config(raw)
    return cfg, raw, config_hash(raw)


def apply_overrides(raw: dict, overrides: dict) -> dict:
    """Deep-merge an override tree into a raw config tree (for sweeps)."""
    merged = dict(raw)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = apply_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged
