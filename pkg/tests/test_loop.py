import dataclasses

import numpy as np
import pytest

from support import load
from rdloop.errors import ConfigurationError
from rdloop.loop import Tolerances, affine_check, picard_solve, residual, simulate


class TestValidation:
    def test_shipped_configs_are_valid(self):
        for name in (
            "zero",
            "heat",
            "regulation",
            "picard_smoothed",
            "picard_strict",
            "stability_zero",
            "stability_allen_cahn",
        ):
            assert load(name).validate() == []

    def test_broken_weights_reported(self):
        problems = load("broken_weights").validate()
        assert any("sum to 1" in p for p in problems)

    def test_all_problems_collected_at_once(self):
        cfg = load("zero")
        bad = dataclasses.replace(
            cfg, horizon=-1.0, state_cap=0.0, tolerances=Tolerances(picard_max_iter=0)
        )
        problems = bad.validate()
        assert len(problems) >= 3
        with pytest.raises(ConfigurationError):
            bad.validated()

    def test_indivisible_dt_reported(self):
        cfg = dataclasses.replace(load("zero"), dt=3e-3)
        assert any("divide" in p for p in cfg.validate())

    def test_unstable_reaction_step_reported(self):
        cfg = dataclasses.replace(load("zero"), dt=0.1, horizon=1.0)
        assert any("unstable" in p for p in cfg.validate())


class TestSimulate:
    def test_zero_config_stays_identically_zero(self):
        tr = simulate(load("zero"))
        assert tr.sup_abs_u == 0.0
        assert np.all(tr.kappa == 0.0)
        assert np.all(tr.readings == 0.0)
        assert tr.selection_defect() == 0.0

    def test_table_shapes_and_time_grid(self):
        cfg = load("zero")
        tr = simulate(cfg)
        n = cfg.n_steps
        assert tr.kappa.shape == (n + 1, 1)
        assert tr.v.shape == (n + 1, 1)
        assert tr.readings.shape == (n + 1, 1)
        assert tr.times[0] == 0.0 and tr.times[-1] == pytest.approx(cfg.horizon)
        assert len(tr.snapshots) <= 65
        assert tr.snapshots[0][0] == 0 and tr.snapshots[-1][0] == n

    def test_selection_always_admissible(self):
        for name in ("heat", "regulation", "picard_smoothed"):
            tr = simulate(load(name))
            assert tr.selection_defect() <= 1e-12

    def test_drive_reproduced_by_controller_map(self):
        from rdloop.controller import controller_trajectory

        cfg = load("regulation")
        tr = simulate(cfg)
        rebuilt = controller_trajectory(cfg.controller, tr.v[1:], cfg.dt)
        assert np.max(np.abs(rebuilt - tr.kappa)) <= 1e-12

    def test_drive_stays_in_invariant_set(self):
        from rdloop.controller import in_M_S

        cfg = load("regulation")
        tr = simulate(cfg)
        ok, msg = in_M_S(
            tr.kappa, tr.bounds.S, cfg.dt, params=cfg.controller, C=cfg.law_bounds()
        )
        assert ok, msg

    def test_regulation_reading_approaches_reference(self):
        cfg = load("regulation")
        tr = simulate(cfg)
        ref = cfg.sensors.references[0]
        initial = abs(tr.readings[0, 0] - ref)
        final = abs(tr.readings[-1, 0] - ref)
        assert final < 0.5 * initial

    def test_deterministic_rerun(self):
        cfg = load("regulation")
        a, b = simulate(cfg), simulate(cfg)
        assert np.array_equal(a.kappa, b.kappa)
        assert np.array_equal(a.readings, b.readings)


class TestResidual:
    def test_zero_config_residual_is_zero(self):
        cfg = load("zero")
        assert residual(simulate(cfg), cfg) == 0.0

    def test_simulated_trajectory_residual_is_order_dt(self):
        cfg = load("picard_smoothed")
        r = residual(simulate(cfg), cfg)
        assert 0.0 <= r <= 10.0 * cfg.dt

    def test_residual_halves_with_dt(self):
        from rdloop.verify import refine_config

        cfg = load("picard_smoothed")
        fine = refine_config(cfg, 2)
        r1 = residual(simulate(cfg), cfg)
        r2 = residual(simulate(fine), fine)
        assert r2 <= 0.75 * r1

    def test_corrupted_drive_is_flagged(self):
        cfg = load("regulation")
        tr = simulate(cfg)
        tr.kappa[cfg.n_steps // 2] += 1.0
        assert residual(tr, cfg) > 10.0 * cfg.dt


class TestPicard:
    def test_smoothed_relay_converges(self):
        cfg = load("picard_smoothed")
        tr, rr = picard_solve(cfg)
        assert rr.converged
        assert rr.final_residual <= cfg.tolerances.picard_tol
        assert rr.iterations <= 50
        # residual history decays monotonically after the first sweep
        assert all(b < a for a, b in zip(rr.residual_history[1:-1], rr.residual_history[2:]))

    def test_zero_config_is_immediate_fixed_point(self):
        tr, rr = picard_solve(load("zero"))
        assert rr.converged and rr.iterations == 1
        assert rr.final_residual == 0.0

    def test_strict_relay_chatters_and_reports_honestly(self):
        cfg = load("picard_strict")
        tr, rr = picard_solve(cfg)
        assert not rr.converged
        assert rr.iterations == cfg.tolerances.picard_max_iter
        assert rr.final_residual > cfg.tolerances.picard_tol

    def test_fixed_point_satisfies_inclusion(self):
        cfg = load("picard_smoothed")
        tr, rr = picard_solve(cfg)
        assert residual(tr, cfg) <= 10.0 * cfg.dt


class TestAffineCheck:
    def test_drive_map_is_affine(self):
        cfg = load("zero")
        rng = np.random.default_rng(7)
        shape = (cfg.n_steps, cfg.controller.m)
        for lam in (0.25, 0.5, 0.75):
            v1 = rng.uniform(-1, 1, size=shape)
            v2 = rng.uniform(-1, 1, size=shape)
            assert affine_check(cfg, v1, v2, lam) <= 1e-12

    def test_shape_mismatch_rejected(self):
        from rdloop.errors import PreconditionError

        cfg = load("zero")
        with pytest.raises(PreconditionError):
            affine_check(cfg, np.zeros((3, 1)), np.zeros((3, 1)), 0.5)
