"""Scenario layout and per-UAV dataset creation."""

from typing import Sequence, Tuple

import numpy as np
from tqdm import tqdm

from uav_channel_gan.antenna import Codebook
from uav_channel_gan.dataset import Dataset, collect_dataset
from uav_channel_gan.environment import EnvironmentModel, Region, RegionProfile
from uav_channel_gan.exceptions import ConfigError


def layout_regions(
    num_uavs: int,
    area: Tuple[float, float],
    altitude: float,
    ue_height: float,
    time_window: Tuple[float, float],
    profiles: Sequence[RegionProfile],
) -> tuple[Region, ...]:
    """
    Split the service area into equal strips along x, one per UAV.

    Args:
        num_uavs: Number of UAVs I
        area: Area size (x, y) in meters
        altitude: UAV hover altitude in meters
        ue_height: UE height in meters
        time_window: Measurement time window (t0, t1) in seconds
        profiles: Propagation profiles, assigned to strips cyclically

    Returns:
        Tuple of regions indexed 0..I-1
    """
    if num_uavs < 1:
        raise ConfigError(f"num_uavs must be >= 1, got {num_uavs}")
    if not profiles:
        raise ConfigError("At least one region profile is required")
    if altitude <= ue_height:
        raise ConfigError(f"altitude ({altitude}) must exceed ue_height ({ue_height})")

    width = area[0] / num_uavs
    regions = []
    for r in range(num_uavs):
        x0 = r * width
        regions.append(
            Region(
                index=r,
                low=(x0, 0.0, ue_height),
                high=(x0 + width, float(area[1]), ue_height),
                hover=(x0 + width / 2, area[1] / 2, altitude),
                time_window=(float(time_window[0]), float(time_window[1])),
                profile=profiles[r % len(profiles)],
            )
        )
    return tuple(regions)


def create_datasets(
    env: EnvironmentModel,
    codebook: Codebook,
    dataset_size: int,
    seed: int,
    show_progress: bool = True,
) -> list[Dataset]:
    """
    Collect one dataset per region with independent child seeds.

    Args:
        env: Ground-truth environment
        codebook: Pilot codebook
        dataset_size: Samples per UAV S_i
        seed: Master seed
        show_progress: Show a progress bar

    Returns:
        Datasets ordered by UAV id
    """
    children = np.random.SeedSequence(seed).spawn(env.num_regions)
    regions = tqdm(env.regions, desc="Collecting datasets", disable=not show_progress)
    datasets = [
        collect_dataset(env, codebook, region, dataset_size, child, owner_id=region.index)
        for region, child in zip(regions, children)
    ]
    print(f"Collected {len(datasets)} datasets of {dataset_size} samples each")
    return datasets
