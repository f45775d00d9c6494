import numpy as np
import pytest

from uav_channel_gan.exceptions import ConfigError, ContractViolation
from uav_channel_gan.experiments import run_rate_evaluation
from uav_channel_gan.inference import (
    BeamSelector,
    EvaluationParams,
    confidence_interval,
    downlink_rate,
    eval_downlink_rate,
    map_beam_select,
)
from uav_channel_gan.model import GenerativeModel
from uav_channel_gan.train import init_states
from uav_channel_gan.transforms import BinGrid

GRID = BinGrid.default((400, 100), 250, (0, 60))
UAV, UE, T = (50.0, 50.0, 250.0), (50.0, 50.0, 0.0), 10.0


def beam_model(gains: dict[int, float], num_conditions: int = 3) -> GenerativeModel:
    keys = []
    for k, gain in gains.items():
        cell = GRID.cell_index(np.array([[*UAV, *UE, T, gain, 0.0]]))[0]
        keys.append((k - 1) * GRID.n_cells + cell)
    return GenerativeModel(GRID, num_conditions, np.array(keys), np.ones(len(keys)))


def test_uniform_model_selects_lowest_condition():
    choice = map_beam_select(beam_model({1: 1e-6, 2: 1e-6, 3: 1e-6}), UAV, UE, T)
    assert choice.condition == 1
    assert not choice.fallback


def test_strongest_condition_wins():
    choice = map_beam_select(beam_model({1: 1e-8, 2: 1e-5, 3: 1e-7}), UAV, UE, T)
    assert choice.condition == 2


def test_empty_neighbourhood_falls_back_to_global_beam():
    selector = BeamSelector(beam_model({1: 1e-8, 3: 1e-5}))
    choice = selector.select((350.0, 50.0, 250.0), (350.0, 50.0, 0.0), T)
    assert choice.fallback
    assert choice.condition == 3
    assert "global beam" in choice.diagnostic


def test_time_window_filters_neighbourhood():
    selector = BeamSelector(beam_model({1: 1e-8, 2: 1e-5}), time_window_s=2.0)
    assert selector.select(UAV, UE, 50.0).fallback
    assert not selector.select(UAV, UE, T).fallback


def test_empty_model_is_rejected():
    with pytest.raises(ContractViolation):
        map_beam_select(GenerativeModel.empty(GRID, 3), UAV, UE, T)


def test_downlink_rate():
    params = EvaluationParams(tx_power_w=1.0, noise_power_w=1.0, bandwidth_hz=50e6)
    assert downlink_rate(0.0, params, 4, 2) == 0.0
    assert downlink_rate(1.0 / np.sqrt(8), params, 4, 2) == pytest.approx(50e6)


def test_evaluation_params_validation():
    with pytest.raises(ConfigError):
        EvaluationParams(tx_power_w=1.0, noise_power_w=0.0)
    with pytest.raises(ConfigError):
        EvaluationParams(tx_power_w=1.0, noise_power_w=1.0, draws=0)


def test_confidence_interval():
    assert confidence_interval(np.full(10, 3.0)) == (3.0, 3.0)
    values = np.random.default_rng(0).normal(5.0, 1.0, size=400)
    low, high = confidence_interval(values, 0.95)
    assert low < values.mean() < high
    assert high - low == pytest.approx(2 * 1.966 * values.std(ddof=1) / 20, rel=0.01)


def test_perfect_csi_dominates_every_draw(small_config, small_datasets, small_grid):
    env, codebook = small_config.environment(), small_config.codebook()
    params = EvaluationParams(
        tx_power_w=0.1, noise_power_w=small_config.noise_power_w(), draws=200
    )
    models = [s.local for s in init_states(small_datasets, small_grid, seed=0)]
    perfect = eval_downlink_rate(env, codebook, params, None, seed=3)
    again = eval_downlink_rate(env, codebook, params, None, seed=3)
    mapped = eval_downlink_rate(env, codebook, params, models, seed=3, label="standalone")
    np.testing.assert_array_equal(perfect.rates, again.rates)
    assert perfect.beam_agreement == 1.0
    assert np.all(perfect.rates >= mapped.rates)
    assert mapped.to_dict()["draws"] == 200


def test_model_count_must_match_regions(small_config, small_datasets, small_grid):
    params = EvaluationParams(tx_power_w=0.1, noise_power_w=1e-12, draws=5)
    models = [s.local for s in init_states(small_datasets, small_grid, seed=0)]
    with pytest.raises(ContractViolation):
        eval_downlink_rate(
            small_config.environment(), small_config.codebook(), params, models[:2], seed=0
        )


def test_rate_ordering_on_default_scenario(quiet_config):
    perfect, distributed, standalone = run_rate_evaluation(quiet_config)
    assert perfect.label == "perfect_csi"
    assert perfect.mean_bps >= distributed.mean_bps >= standalone.mean_bps
    assert 1.4 <= distributed.mean_bps / standalone.mean_bps <= 2.6
