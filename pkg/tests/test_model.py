import numpy as np
import pytest

from uav_channel_gan.exceptions import ContractViolation
from uav_channel_gan.model import Discriminator, GenerativeModel
from uav_channel_gan.transforms import BinGrid

GRID = BinGrid.default((400, 100), 250, (0, 60))
N = GRID.n_cells


def model(keys, weights, num_conditions=2):
    return GenerativeModel(GRID, num_conditions, np.array(keys), np.array(weights, dtype=float))


def test_construction_merges_and_normalizes():
    m = model([5, 3, 5, 7], [1, 1, 1, 0])
    np.testing.assert_array_equal(m.keys, [3, 5])
    np.testing.assert_allclose(m.weights, [1 / 3, 2 / 3])


def test_rejects_keys_outside_table():
    with pytest.raises(ContractViolation):
        model([2 * N], [1.0])


def test_from_dataset(small_datasets, small_grid):
    m = GenerativeModel.from_dataset(small_grid, small_datasets[0])
    assert m.weights.sum() == pytest.approx(1.0)
    assert np.all(np.diff(m.keys) > 0)
    assert set(m.occupied_conditions()) == set(small_datasets[0].conditions())


def test_conditionals():
    m = model([1, 2, N + 4], [1, 1, 2])
    np.testing.assert_allclose(m.condition_mass(), [0.5, 0.5])
    cells, probs = m.conditional(1)
    np.testing.assert_array_equal(cells, [1, 2])
    np.testing.assert_allclose(probs, [0.5, 0.5])
    np.testing.assert_allclose(m.conditional_probability(np.array([N + 4, 9])), [1.0, 0.0])


def test_mix_is_convex_combination():
    a, b = model([1], [1]), model([2], [1])
    mixed = GenerativeModel.mix([(0.25, a), (0.75, b)])
    np.testing.assert_allclose(mixed.probability(np.array([1, 2])), [0.25, 0.75])


def test_mix_rejects_incompatible_models():
    with pytest.raises(ContractViolation):
        GenerativeModel.mix([(0.5, model([1], [1])), (0.5, model([1], [1], num_conditions=3))])


def test_corruption_keeps_condition_marginal():
    m = model([1, 2, N + 4], [3, 1, 4])
    noisy = m.corruption()
    np.testing.assert_allclose(noisy.condition_mass(), m.condition_mass())
    np.testing.assert_allclose(noisy.probability(np.array([1, 2])), [0.25, 0.25])


def test_sample_stays_on_support():
    m = model([1, 2, N + 4], [1, 1, 2])
    drawn = m.sample(500, np.random.default_rng(0))
    assert drawn.support() <= m.support()
    assert set(drawn.occupied_conditions()) == {1, 2}
    assert GenerativeModel.empty(GRID, 2).sample(10, np.random.default_rng(0)).is_empty


def test_identical_inputs_give_half_discriminator():
    m = model([1, 2, N + 4], [1, 1, 2])
    for eps in (0.0, 0.3):
        disc = Discriminator(m, m, disc_error=eps)
        np.testing.assert_allclose(disc.values, 0.5)
        assert disc.max_deviation() == pytest.approx(0.0)
    assert Discriminator(m, m)(np.array([77])) == 0.5


def test_discriminator_prefers_mixture_support():
    real, fake = model([1, 2], [1, 1]), model([1], [1])
    disc = Discriminator(real, fake, floor=1e-12)
    assert disc(np.array([2]))[0] == pytest.approx(1.0)
    assert disc(np.array([1]))[0] == pytest.approx(1 / 3)


def test_dict_round_trip():
    m = model([1, 2, N + 4], [1, 1, 2])
    assert GenerativeModel.from_dict(GRID, m.to_dict()) == m


def test_from_dict_rejects_other_grid():
    data = model([1], [1]).to_dict()
    other = BinGrid.default((400, 100), 250, (0, 60), time_bins=4)
    with pytest.raises(ContractViolation):
        GenerativeModel.from_dict(other, data)
