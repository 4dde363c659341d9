import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdloop.errors import ConfigurationError
from rdloop.feedback import (
    AdmissibleInterval,
    RelaySpec,
    SelectionStrategy,
    WeightMatrix,
    admissible_set,
    relay,
    select,
    weights_validate,
)

STRICT = RelaySpec("strict")
CONVEX = RelaySpec("convexified")


class TestRelay:
    def test_convexified_positive_error(self):
        w = relay(CONVEX, 0.5)
        assert (w.lo, w.hi) == (-1.0, -1.0)

    def test_convexified_at_zero_is_full_interval(self):
        w = relay(CONVEX, 0.0)
        assert (w.lo, w.hi) == (-1.0, 1.0)

    def test_strict_at_zero_is_singleton_zero(self):
        w = relay(STRICT, 0.0)
        assert (w.lo, w.hi) == (0.0, 0.0)

    def test_negative_error_gives_plus_one(self):
        for spec in (STRICT, CONVEX):
            w = relay(spec, -1e-9)
            assert (w.lo, w.hi) == (1.0, 1.0)

    def test_smoothed_is_clamped_linear(self):
        spec = RelaySpec("smoothed", delta=0.1)
        w = relay(spec, 0.05)
        assert w.lo == w.hi == pytest.approx(-0.5)
        assert relay(spec, 10.0).lo == -1.0
        assert relay(spec, -10.0).hi == 1.0

    def test_smoothed_requires_positive_delta(self):
        with pytest.raises(ConfigurationError):
            RelaySpec("smoothed", delta=0.0)

    @given(r=st.floats(-5, 5, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_all_modes_bounded_by_unit_interval(self, r):
        for spec in (STRICT, CONVEX, RelaySpec("smoothed", delta=0.3)):
            w = relay(spec, r)
            assert -1.0 <= w.lo <= w.hi <= 1.0

    def test_upper_semicontinuity_probe(self):
        # for any sequence r_i -> r*, the relay sets eventually land
        # inside an epsilon-inflation of the limit set
        eps = 1e-9
        for r_star in (-0.5, 0.0, 0.5):
            target = relay(CONVEX, r_star)
            for i in range(4, 12):
                r = r_star + (1.0 if r_star >= 0 else -1.0) * 2.0**-i
                w = relay(CONVEX, r)
                assert w.lo >= target.lo - eps and w.hi <= target.hi + eps


class TestWeights:
    def test_constant_rows_pass(self):
        assert weights_validate(WeightMatrix.constant([[0.5, 0.5]])) is None

    def test_bad_row_sum_reported(self):
        result = weights_validate(WeightMatrix.constant([[0.6, 0.6]]))
        assert result == (0, 0.0)

    def test_negative_entry_reported(self):
        result = weights_validate(WeightMatrix.constant([[1.5, -0.5]]))
        assert result == (0, 0.0)

    def test_interpolating_rows_stay_stochastic(self):
        wm = WeightMatrix(
            [0.0, 1.0],
            [[[1.0, 0.0]], [[0.0, 1.0]]],
        )
        assert weights_validate(wm) is None
        mid = wm.at(0.5)
        np.testing.assert_allclose(mid, [[0.5, 0.5]])
        assert np.sum(wm.at(0.3)) == pytest.approx(1.0)


class TestAdmissibleSet:
    def test_single_sensor_zero_error(self):
        alpha = WeightMatrix.constant([[1.0]])
        (w,) = admissible_set(CONVEX, alpha, 0.0, [0.0])
        assert (w.lo, w.hi) == (-1.0, 1.0)

    def test_weighted_combination_of_singletons(self):
        alpha = WeightMatrix.constant([[0.3, 0.7]])
        (w,) = admissible_set(CONVEX, alpha, 0.0, [1.0, -1.0])
        assert w.lo == w.hi == pytest.approx(0.4)

    def test_minkowski_sum_of_full_intervals(self):
        alpha = WeightMatrix.constant([[0.5, 0.5]])
        (w,) = admissible_set(CONVEX, alpha, 0.0, [0.0, 0.0])
        assert (w.lo, w.hi) == (-1.0, 1.0)

    @given(
        errs=st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=2),
        w0=st.floats(0, 1),
    )
    @settings(max_examples=100, deadline=None)
    def test_sets_bounded_and_convex(self, errs, w0):
        alpha = WeightMatrix.constant([[w0, 1.0 - w0]])
        (w,) = admissible_set(CONVEX, alpha, 0.0, errs)
        assert -1.0 <= w.lo <= w.hi <= 1.0
        # convexity: any combination of two members stays inside
        v1, v2 = w.lo, w.hi
        for lam in (0.0, 0.3, 1.0):
            assert w.contains(lam * v1 + (1 - lam) * v2, tol=1e-12)


class TestSelect:
    def test_prefer_zero_inside(self):
        assert select(AdmissibleInterval(-1, 1), SelectionStrategy("prefer_zero")) == 0.0

    def test_prefer_zero_snaps_to_nearest_endpoint(self):
        assert select(AdmissibleInterval(0.2, 0.8), SelectionStrategy("prefer_zero")) == 0.2

    def test_singleton_forces_the_value(self):
        w = AdmissibleInterval(0.4, 0.4)
        for kind in ("midpoint", "prefer_zero", "extreme_lo", "extreme_hi"):
            assert select(w, SelectionStrategy(kind), previous=-3.0) == 0.4

    def test_prefer_previous_clamps(self):
        strat = SelectionStrategy("prefer_previous")
        w = AdmissibleInterval(-0.5, 0.5)
        assert select(w, strat, previous=2.0) == 0.5
        assert select(w, strat, previous=0.1) == 0.1
        assert select(w, strat, previous=None) == 0.0  # midpoint fallback

    def test_hysteresis_keeps_previous_in_band(self):
        strat = SelectionStrategy("hysteresis", band=0.2)
        w = AdmissibleInterval(0.0, 1.0)
        assert select(w, strat, previous=-0.1) == 0.0  # inside band, clamped
        assert select(w, strat, previous=-5.0) == 0.5  # outside band, midpoint

    @given(
        lo=st.floats(-1, 1),
        width=st.floats(0, 2),
        prev=st.one_of(st.none(), st.floats(-3, 3)),
    )
    @settings(max_examples=200, deadline=None)
    def test_selection_always_lands_inside(self, lo, width, prev):
        w = AdmissibleInterval(lo, lo + width)
        for kind in ("midpoint", "prefer_zero", "prefer_previous", "extreme_lo", "extreme_hi"):
            v = select(w, SelectionStrategy(kind), previous=prev)
            assert w.contains(v, tol=1e-12)
        v = select(w, SelectionStrategy("hysteresis", band=0.1), previous=prev)
        assert w.contains(v, tol=1e-12)


def test_negative_feedback_sign_single_sensor():
    alpha = WeightMatrix.constant([[1.0]])
    strat = SelectionStrategy("midpoint")
    for err in (-2.0, -0.1, 0.05, 3.0):
        (w,) = admissible_set(STRICT, alpha, 0.0, [err])
        v = select(w, strat)
        assert np.sign(v) == -np.sign(err)
