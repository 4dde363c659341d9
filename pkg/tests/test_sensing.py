import numpy as np
import pytest

from rdloop.errors import ConfigurationError, PreconditionError
from rdloop.grid import Field, Grid
from rdloop.sensing import SensorArray, error_signal, read

GRID = Grid((1.0,), (129,))


def test_read_constant_field():
    arr = SensorArray([[0.25], [0.5], [0.75]], [0.0, 0.0, 0.0])
    np.testing.assert_allclose(read(arr, Field.constant(GRID, 4.2)), 4.2)


def test_read_linear_field_exact():
    arr = SensorArray([[0.25], [0.75]], [0.0, 0.0])
    f = Field(GRID, GRID.axes()[0])
    np.testing.assert_allclose(read(arr, f), [0.25, 0.75], atol=1e-14)


def test_read_cosine_node_at_midpoint():
    arr = SensorArray([[0.5]], [0.0])
    f = Field(GRID, np.cos(np.pi * GRID.axes()[0]))
    assert abs(read(arr, f)[0]) <= 1e-6


def test_read_is_linear_in_field():
    rng = np.random.default_rng(8)
    arr = SensorArray([[0.3], [0.62]], [0.0, 0.0])
    a = rng.normal(size=129)
    b = rng.normal(size=129)
    lhs = read(arr, Field(GRID, 2.0 * a - 0.5 * b))
    rhs = 2.0 * read(arr, Field(GRID, a)) - 0.5 * read(arr, Field(GRID, b))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_error_signal():
    arr = SensorArray([[0.25], [0.75]], [0.5, 0.5])
    np.testing.assert_allclose(error_signal(arr, [1.0, 0.0]), [0.5, -0.5])
    np.testing.assert_allclose(error_signal(arr, [0.5, 0.5]), [0.0, 0.0])
    one = SensorArray([[0.5]], [0.5])
    np.testing.assert_allclose(error_signal(one, [0.2]), [-0.3])


def test_error_signal_length_mismatch():
    arr = SensorArray([[0.5]], [0.0])
    with pytest.raises(PreconditionError):
        error_signal(arr, [1.0, 2.0])


def test_sensor_validation():
    with pytest.raises(ConfigurationError):
        SensorArray([], [])
    with pytest.raises(ConfigurationError):
        SensorArray([[0.5]], [0.0, 1.0])
    arr = SensorArray([[0.0]], [0.0])
    assert arr.check_interior(GRID)  # boundary point reported
