import dataclasses

import numpy as np
import pytest

from support import load
from rdloop.errors import PreconditionError
from rdloop.verify import (
    convergence_study,
    heat_oracle,
    holder_probe,
    random_drive_table,
    refine_config,
    stability_probe,
)
from rdloop.loop import simulate


@pytest.fixture(scope="module")
def heat_report():
    return heat_oracle()


class TestHeatOracle:
    @pytest.fixture
    def report(self, heat_report):
        return heat_report

    def test_passes(self, report):
        assert report.passed

    def test_pinned_error(self, report):
        assert report.measured["pinned_max_error"] <= 1e-3
        # frozen regression value: 2.0e-4 measured on this build
        assert report.measured["pinned_max_error"] == pytest.approx(2.0e-4, rel=0.05)

    def test_orders(self, report):
        assert report.measured["spatial_order"] == pytest.approx(2.0, abs=0.2)
        assert report.measured["temporal_order"] == pytest.approx(1.0, abs=0.2)

    def test_errors_decrease_monotonically(self, report):
        for key in ("spatial_errors", "temporal_errors"):
            errs = report.measured[key]
            assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_2d_variant_passes(self):
        rep = heat_oracle(
            grid_sizes=(9, 17, 33), dts=(4e-3, 2e-3, 1e-3), dim=2, pinned=(65, 1e-3)
        )
        assert abs(rep.measured["spatial_order"] - 2.0) <= 0.3
        assert rep.measured["pinned_max_error"] <= 5e-3


class TestRandomDriveTable:
    def test_respects_sup_and_rate_bounds(self):
        rng = np.random.default_rng(0)
        times = np.linspace(0.0, 1.0, 201)
        for _ in range(10):
            tab = random_drive_table(rng, times, 2, amplitude=1.5, rate_bound=3.0)
            assert np.max(np.abs(tab)) <= 1.5 + 1e-12
            slopes = np.diff(tab, axis=0) / np.diff(times)[:, None]
            assert np.max(np.abs(slopes)) <= 3.0 + 1e-9


class TestStabilityProbe:
    def test_linear_case_ratio_is_constant(self):
        rep = stability_probe(load("stability_zero"), pairs=20, seed=0)
        assert rep.passed
        assert rep.measured["spread"] <= 1.05
        # frozen regression value for the shipped config
        assert rep.measured["c5"] == pytest.approx(0.2599, abs=0.01)

    def test_nonlinear_case_stays_near_linear_constant(self):
        rep = stability_probe(load("stability_allen_cahn"), pairs=20, seed=0)
        assert rep.passed
        assert rep.measured["spread"] <= 1.05
        # frozen cap: measured 0.304 on this build
        assert rep.measured["c5"] <= 0.4

    def test_ratio_cap_enforced(self):
        rep = stability_probe(load("stability_zero"), pairs=3, seed=1, ratio_cap=1e-9)
        assert not rep.passed

    def test_requires_at_least_one_pair(self):
        with pytest.raises(PreconditionError):
            stability_probe(load("stability_zero"), pairs=0)


class TestHolderProbe:
    def _run(self, name):
        cfg = dataclasses.replace(load(name), snapshot_stride=1)
        return holder_probe(simulate(cfg), cfg), cfg

    def test_heat_case_exponent_near_one(self):
        rep, _ = self._run("heat")
        assert rep.passed
        assert rep.measured["alpha"] >= 0.9
        assert np.isfinite(rep.measured["c6"])

    def test_regulation_case(self):
        rep, _ = self._run("regulation")
        assert rep.passed
        assert rep.measured["alpha"] > 0.0
        # frozen regression: alpha ~ 0.85, c6 ~ 2.2 on this build
        assert rep.measured["alpha"] == pytest.approx(0.846, abs=0.05)
        assert rep.measured["c6"] <= 5.0

    def test_c6_stable_across_random_drives(self):
        from rdloop.verify import open_loop_fields
        from rdloop.loop import Trajectory

        cfg = dataclasses.replace(load("regulation"), snapshot_stride=1)
        tr = simulate(cfg)
        rng = np.random.default_rng(123)
        c6s = []
        for _ in range(5):
            table = random_drive_table(
                rng, cfg.times, cfg.controller.m, amplitude=tr.bounds.S * 0.5,
                rate_bound=min(tr.bounds.rate_bound),
            )
            fields = open_loop_fields(cfg, table)
            fake = dataclasses.replace(
                tr, snapshots=[(i, fields[i]) for i in range(cfg.n_steps + 1)]
            )
            c6s.append(holder_probe(fake, cfg).measured["c6"])
        assert max(c6s) / min(c6s) <= 10.0

    def test_requires_per_step_snapshots(self):
        cfg = load("regulation")
        tr = simulate(cfg)  # auto stride keeps at most 64 snapshots
        with pytest.raises(PreconditionError):
            holder_probe(tr, cfg)


class TestRefineConfig:
    def test_coarse_nodes_are_subset(self):
        cfg = load("zero")
        fine = refine_config(cfg, 2)
        assert fine.grid.counts[0] == 2 * (cfg.grid.counts[0] - 1) + 1
        np.testing.assert_allclose(
            fine.grid.axes()[0][::2], cfg.grid.axes()[0], atol=1e-15
        )
        assert fine.dt == pytest.approx(cfg.dt / 2)
        np.testing.assert_allclose(fine.u0.values[::2], cfg.u0.values, atol=1e-14)


class TestConvergenceStudy:
    def test_zero_config_is_exact_at_all_levels(self):
        rep = convergence_study(load("zero"), levels=3)
        assert rep.passed
        assert max(rep.measured["residuals"]) == 0.0
        assert max(rep.measured["final_errors"]) == 0.0

    def test_smoothed_loop_contracts_under_refinement(self):
        rep = convergence_study(load("picard_smoothed"), levels=3)
        assert rep.passed
        for ratio in rep.measured["kappa_ratios"]:
            assert ratio <= 0.75
        for ratio in rep.measured["residual_ratios"]:
            assert ratio <= 0.75

    def test_requires_three_levels(self):
        with pytest.raises(PreconditionError):
            convergence_study(load("zero"), levels=2)
