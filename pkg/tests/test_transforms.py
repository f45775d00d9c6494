import numpy as np
import pytest

from uav_channel_gan.exceptions import ConfigError, ContractViolation
from uav_channel_gan.transforms import BinGrid, LinearAxis, SymLogAxis


def test_linear_axis_clips_to_end_bins():
    axis = LinearAxis("x", 0.0, 10.0, 5)
    idx = axis.index(np.array([-1.0, 0.0, 1.99, 2.0, 10.0, 11.0]))
    np.testing.assert_array_equal(idx, [0, 0, 0, 1, 4, 4])
    np.testing.assert_allclose(axis.representative(np.array([0, 4])), [1.0, 9.0])


def test_linear_axis_rejects_empty_range():
    with pytest.raises(ConfigError):
        LinearAxis("x", 1.0, 1.0, 4)


def test_symlog_axis_signs_and_threshold():
    axis = SymLogAxis("g", 1e-9, 1e-4, 16)
    idx = axis.index(np.array([0.0, 1e-10, -1e-10, 1.0, -1.0]))
    np.testing.assert_array_equal(idx, [8, 8, 7, 15, 0])


def test_symlog_representative_lands_in_its_bin():
    axis = SymLogAxis("g", 1e-9, 1e-4, 16)
    idx = np.arange(16)
    values = axis.representative(idx)
    np.testing.assert_array_equal(axis.index(values), idx)
    assert np.all(values[:8] < 0) and np.all(values[8:] > 0)


def test_symlog_axis_needs_even_bins():
    with pytest.raises(ConfigError):
        SymLogAxis("g", 1e-9, 1e-4, 7)


def test_grid_cells_round_trip(small_grid):
    rng = np.random.default_rng(0)
    cells = rng.integers(0, small_grid.n_cells, size=200)
    np.testing.assert_array_equal(small_grid.cell_index(small_grid.representative(cells)), cells)
    assert small_grid.coordinates(cells).shape == (200, 9)


def test_grid_rejects_wrong_feature_count(small_grid):
    with pytest.raises(ContractViolation):
        small_grid.cell_index(np.zeros((3, 8)))


def test_default_grid_equality():
    first = BinGrid.default((400, 100), 250, (0, 60))
    second = BinGrid.default((400, 100), 250, (0, 60))
    assert first == second
    assert hash(first) == hash(second)
    assert first != BinGrid.default((400, 100), 250, (0, 60), time_bins=4)
