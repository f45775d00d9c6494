import pytest

from uav_channel_gan.config import SWEEP_AXES, load_config
from uav_channel_gan.exceptions import ConfigError


def test_defaults(default_config):
    assert default_config.scenario.num_uavs == 4
    assert len(default_config.scenario.profiles) == 4
    assert default_config.channel.tx_elements == 256
    assert default_config.topology.rb_budget == 4
    assert default_config.completion.gamma.kind == "loop_linear"
    assert default_config.codebook().size == 81
    assert set(default_config.experiment.sweep) == set(SWEEP_AXES)


def test_overrides(config_dir):
    config = load_config("defaults", str(config_dir), ["topology.rb_budget=8", "experiment.seed=7"])
    assert config.topology.rb_budget == 8
    assert config.experiment.seed == 7
    assert [n.out_budget for n in config.nodes()] == [2, 2, 2, 2]


@pytest.mark.parametrize(
    "override",
    ["topology.share_ratio=1.5", "topology.rb_budget=2", "topology.unknown_key=1"],
)
def test_invalid_overrides(config_dir, override):
    with pytest.raises(ConfigError):
        load_config("defaults", str(config_dir), [override])


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.yaml"))


def test_nodes_hover_over_regions(default_config):
    nodes = default_config.nodes()
    regions = default_config.environment().regions
    assert [n.position for n in nodes] == [r.hover for r in regions]
    assert all(n.dataset_size == 1000 for n in nodes)


def test_with_axis(default_config):
    assert default_config.with_axis("B", 8).topology.rb_budget == 8
    sized = default_config.with_axis("I", 6)
    assert sized.scenario.num_uavs == 6
    assert sized.topology.rb_budget == 6
    assert default_config.with_axis("eta", 0.25).learning_params().share_ratio == 0.25
    assert default_config.with_axis("epsilon", 0.2).learning_params().disc_error == 0.2
    with pytest.raises(ConfigError):
        default_config.with_axis("B", 2)


def test_sweep_values_sorted(default_config):
    assert default_config.sweep_values("I") == [4, 5, 6, 8]
    with pytest.raises(ConfigError):
        default_config.sweep_values("power")


def test_flat_params(default_config):
    params = default_config.to_params()
    assert params["topology.rb_budget"] == 4
    assert params["completion.gamma.kind"] == "loop_linear"
    assert params["scenario.profiles"] == "residential,park,urban,suburban"


def test_noise_power(default_config):
    # -174 dBm/Hz over 50 MHz with a 7 dB noise figure
    assert default_config.noise_power_w() == pytest.approx(1e-12, rel=0.01)
