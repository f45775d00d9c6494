from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from uav_channel_gan.antenna import AntennaConfig, Codebook
from uav_channel_gan.config import load_config
from uav_channel_gan.data_loader import create_datasets
from uav_channel_gan.topology import ConstraintParams, UavNode, network_formation
from uav_channel_gan.transforms import BinGrid

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture(scope="session")
def default_config():
    return load_config("defaults", str(CONFIG_DIR))


@pytest.fixture(scope="session")
def quiet_config(default_config):
    return replace(default_config, logging=replace(default_config.logging, show_progress=False))


@pytest.fixture(scope="session")
def small_config(quiet_config):
    """Four regions with small arrays and datasets for fast end-to-end checks."""
    return replace(
        quiet_config,
        channel=replace(quiet_config.channel, tx_elements=16, rx_elements=8),
        scenario=replace(quiet_config.scenario, dataset_size=200),
    )


@pytest.fixture
def small_antenna() -> AntennaConfig:
    return AntennaConfig(tx_elements=8, rx_elements=4, wavelength_m=0.01)


@pytest.fixture
def small_codebook(small_antenna) -> Codebook:
    sines = np.linspace(-0.8, 0.8, 9)
    return Codebook.from_sine_grid(small_antenna, sines, sines)


@pytest.fixture
def constraints() -> ConstraintParams:
    return ConstraintParams(
        snr_threshold=10.0,
        tx_time_limit=0.01,
        sample_scalars=11,
        share_ratio=0.5,
        rb_budget=4,
    )


def line_nodes(count: int, spacing: float = 100.0, out_budget: int = 1) -> list[UavNode]:
    return [
        UavNode(
            id=i,
            position=(i * spacing, 50.0, 250.0),
            dataset_size=1000,
            max_power_w=10.0,
            out_budget=out_budget,
        )
        for i in range(count)
    ]


@pytest.fixture
def ring4(constraints):
    return network_formation(line_nodes(4), constraints)


@pytest.fixture(scope="session")
def small_datasets(small_config):
    return create_datasets(
        small_config.environment(),
        small_config.codebook(),
        small_config.scenario.dataset_size,
        seed=7,
        show_progress=False,
    )


@pytest.fixture(scope="session")
def small_grid(small_config) -> BinGrid:
    return small_config.grid()
