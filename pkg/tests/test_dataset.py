import numpy as np
import pytest

from uav_channel_gan.data_loader import create_datasets, layout_regions
from uav_channel_gan.dataset import (
    ChannelSample,
    Dataset,
    collect_dataset,
    load_datasets_csv,
    load_datasets_json,
    pool_datasets,
    save_datasets_csv,
    save_datasets_json,
)
from uav_channel_gan.exceptions import ConfigError, ContractViolation


def test_layout_regions_partition_the_area(small_config):
    sc = small_config.scenario
    regions = layout_regions(4, sc.area, sc.altitude, sc.ue_height, sc.time_window, sc.profiles)
    assert [r.index for r in regions] == [0, 1, 2, 3]
    assert regions[0].low[0] == 0.0
    assert regions[-1].high[0] == pytest.approx(sc.area[0])
    for left, right in zip(regions, regions[1:]):
        assert left.high[0] == pytest.approx(right.low[0])
    assert all(r.hover[2] == sc.altitude for r in regions)


def test_layout_regions_rejects_low_altitude(small_config):
    sc = small_config.scenario
    with pytest.raises(ConfigError):
        layout_regions(4, sc.area, 0.0, 0.0, sc.time_window, sc.profiles)


def test_datasets_are_deterministic(small_config, small_datasets):
    again = create_datasets(
        small_config.environment(),
        small_config.codebook(),
        small_config.scenario.dataset_size,
        seed=7,
        show_progress=False,
    )
    assert again == small_datasets


def test_datasets_have_requested_size_and_conditions(small_config, small_datasets):
    K = small_config.codebook().size
    assert [d.owner_id for d in small_datasets] == [0, 1, 2, 3]
    for dataset in small_datasets:
        assert len(dataset) == small_config.scenario.dataset_size
        conditions = dataset.conditions()
        assert conditions.min() >= 1 and conditions.max() <= K
        assert np.all(np.isfinite(dataset.features()))


def test_region_bounding_boxes_are_disjoint(small_datasets):
    boxes = [d.bounding_box() for d in small_datasets]
    for (_, left_high), (right_low, _) in zip(boxes, boxes[1:]):
        assert left_high[0] < right_low[0]


def test_sample_times_inside_window(small_config, small_datasets):
    t0, t1 = small_config.scenario.time_window
    times = np.concatenate([d.features()[:, 6] for d in small_datasets])
    assert times.min() >= t0 and times.max() <= t1


def test_collect_dataset_rejects_empty_size(small_config):
    env = small_config.environment()
    with pytest.raises(ConfigError):
        collect_dataset(env, small_config.codebook(), env.regions[0], 0, seed=1)


def test_dataset_rejects_out_of_range_condition():
    sample = ChannelSample((0, 0, 100), (0, 0, 0), 0.0, 1j, condition_idx=5)
    with pytest.raises(ContractViolation):
        Dataset(0, [sample], num_conditions=4)


def test_pool_datasets(small_datasets):
    pooled = pool_datasets(small_datasets)
    assert len(pooled) == sum(len(d) for d in small_datasets)
    assert pooled.num_conditions == small_datasets[0].num_conditions


def test_csv_round_trip(tmp_path, small_datasets):
    path = tmp_path / "datasets.csv"
    save_datasets_csv(small_datasets, path)
    loaded = load_datasets_csv(path, small_datasets[0].num_conditions)
    assert loaded == small_datasets


def test_json_round_trip(tmp_path, small_datasets):
    path = tmp_path / "datasets.json"
    save_datasets_json(small_datasets, path)
    assert load_datasets_json(path) == small_datasets
