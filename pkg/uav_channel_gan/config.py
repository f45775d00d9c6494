"""Configuration loading (hydra + omegaconf), validation and typed builders."""

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from hydra import compose, initialize_config_dir
from hydra.errors import HydraException
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from uav_channel_gan.antenna import AntennaConfig, Codebook
from uav_channel_gan.completion import GammaSchedule
from uav_channel_gan.data_loader import layout_regions
from uav_channel_gan.environment import EnvironmentModel, RegionProfile
from uav_channel_gan.exceptions import ConfigError
from uav_channel_gan.inference import EvaluationParams
from uav_channel_gan.topology import ConstraintParams, UavNode, split_rb_budget
from uav_channel_gan.train import EXCHANGE_MODES, LearningParams
from uav_channel_gan.transforms import BinGrid
from uav_channel_gan.utils import db_to_linear, dbm_to_watts, noise_power_watts

SWEEP_AXES = ("B", "I", "eta", "epsilon")


@dataclass(frozen=True)
class ScenarioConfig:
    num_uavs: int = 4
    area: Tuple[float, float] = (400.0, 100.0)
    altitude: float = 250.0
    ue_height: float = 0.0
    time_window: Tuple[float, float] = (0.0, 60.0)
    dataset_size: int = 1000
    uav_max_power_dbm: float = 40.0
    profiles: Tuple[RegionProfile, ...] = ()


@dataclass(frozen=True)
class ChannelConfig:
    carrier_ghz: float = 30.0
    tx_elements: int = 256
    rx_elements: int = 64
    element_phase_unit: float = np.pi
    aod_sines: Tuple[float, ...] = tuple(np.linspace(-0.8, 0.8, 9).round(12))
    aoa_sines: Tuple[float, ...] = tuple(np.linspace(-0.8, 0.8, 9).round(12))
    pilot_power_dbm: float = 20.0
    noise_psd_dbm_per_hz: float = -174.0
    bandwidth_mhz: float = 50.0
    noise_figure_db: float = 7.0
    misalignment_loss_db: float = 45.0
    nlos_sine_spread: float = 0.3


@dataclass(frozen=True)
class TopologyConfig:
    rb_budget: int = 4
    share_ratio: float = 0.5
    snr_threshold_db: float = 10.0
    tx_time_limit: float = 0.01
    sample_scalars: int = 11
    bits_per_scalar: int = 32
    bandwidth_mhz: float = 2.0
    carrier_ghz: float = 2.4
    noise_psd_dbm_per_hz: float = -174.0


@dataclass(frozen=True)
class CompletionConfig:
    disc_error: float = 0.1
    confidence: float = 0.99
    train_time: float = 0.09
    max_iterations: int = 1000
    gamma: GammaSchedule = field(default_factory=GammaSchedule)


@dataclass(frozen=True)
class LearningConfig:
    minibatch_size: int = 128
    exchange_mode: str = "expected"
    retain_received: bool = True
    log_floor: float = 1e-9
    rounds: Optional[int] = None
    spatial_bins: int = 16
    time_bins: int = 8
    gain_bins: int = 16
    gain_threshold: float = 1e-9
    gain_max: float = 1e-4


@dataclass(frozen=True)
class ExperimentSettings:
    seed: int = 42
    output_dir: str = "outputs"
    format: str = "csv"
    n_jobs: int = 1
    replications: int = 1
    spread_trials: int = 100_000
    spread_max_iterations: int = 30
    model_param_count: int = 1_000_000
    eval_draws: int = 1000
    map_radius_m: float = 25.0
    map_time_window_s: Optional[float] = None
    confidence_level: float = 0.95
    comparison_sizes: Tuple[int, ...] = (4, 8)
    sweep: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LoggingConfig:
    mlflow_uri: Optional[str] = None
    experiment_name: str = "uav_channel_gan"
    show_progress: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, typed view of the composed configuration."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    completion: CompletionConfig = field(default_factory=CompletionConfig)
    learning: LearningConfig = field(default_factory=LearningConfig)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    @classmethod
    def from_dictconfig(cls, cfg: DictConfig) -> "ExperimentConfig":
        data = OmegaConf.to_container(cfg, resolve=True)
        try:
            scenario = dict(data.get("scenario", {}))
            scenario["area"] = tuple(scenario.get("area", ScenarioConfig.area))
            scenario["time_window"] = tuple(scenario.get("time_window", ScenarioConfig.time_window))
            scenario["profiles"] = tuple(RegionProfile(**p) for p in scenario.get("profiles", []))
            channel = dict(data.get("channel", {}))
            for key in ("aod_sines", "aoa_sines"):
                if key in channel:
                    channel[key] = tuple(float(v) for v in channel[key])
            completion = dict(data.get("completion", {}))
            completion["gamma"] = GammaSchedule(**completion.get("gamma", {}))
            experiment = dict(data.get("experiment", {}))
            if "comparison_sizes" in experiment:
                experiment["comparison_sizes"] = tuple(experiment["comparison_sizes"])
            config = cls(
                scenario=ScenarioConfig(**scenario),
                channel=ChannelConfig(**channel),
                topology=TopologyConfig(**data.get("topology", {})),
                completion=CompletionConfig(**completion),
                learning=LearningConfig(**data.get("learning", {})),
                experiment=ExperimentSettings(**experiment),
                logging=LoggingConfig(**data.get("logging", {})),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        validate_config(config)
        return config

    def to_params(self) -> dict:
        """Flat key=value view used for provenance headers and MLflow parameters."""
        flat = {}
        for group in fields(self):
            for key, value in asdict(getattr(self, group.name)).items():
                if key in ("profiles", "sweep"):
                    continue
                if isinstance(value, dict):
                    for sub, v in value.items():
                        flat[f"{group.name}.{key}.{sub}"] = v
                elif isinstance(value, (list, tuple)):
                    flat[f"{group.name}.{key}"] = ",".join(repr(v) for v in value)
                else:
                    flat[f"{group.name}.{key}"] = value
        flat["scenario.profiles"] = ",".join(p.name for p in self.scenario.profiles)
        return flat

    def with_axis(self, axis: str, value: float) -> "ExperimentConfig":
        """
        Copy with one sweep axis set.

        Raising I also raises B to at least I, since every UAV needs one out-edge.
        """
        if axis == "B":
            config = replace(self, topology=replace(self.topology, rb_budget=int(value)))
        elif axis == "I":
            size = int(value)
            config = replace(
                self,
                scenario=replace(self.scenario, num_uavs=size),
                topology=replace(self.topology, rb_budget=max(self.topology.rb_budget, size)),
            )
        elif axis == "eta":
            config = replace(self, topology=replace(self.topology, share_ratio=float(value)))
        elif axis == "epsilon":
            config = replace(self, completion=replace(self.completion, disc_error=float(value)))
        else:
            raise ConfigError(f"Unknown sweep axis '{axis}', expected one of {SWEEP_AXES}")
        validate_config(config)
        return config

    def sweep_values(self, axis: str) -> list[float]:
        if axis not in SWEEP_AXES:
            raise ConfigError(f"Unknown sweep axis '{axis}', expected one of {SWEEP_AXES}")
        values = self.experiment.sweep.get(axis)
        if not values:
            raise ConfigError(f"No sweep values configured for axis '{axis}'")
        return sorted(values)

    def antenna(self) -> AntennaConfig:
        ch = self.channel
        return AntennaConfig.from_carrier(
            ch.tx_elements, ch.rx_elements, ch.carrier_ghz * 1e9, ch.element_phase_unit
        )

    def codebook(self) -> Codebook:
        ch = self.channel
        return Codebook.from_sine_grid(self.antenna(), ch.aod_sines, ch.aoa_sines)

    def noise_power_w(self) -> float:
        ch = self.channel
        return noise_power_watts(
            ch.noise_psd_dbm_per_hz, ch.bandwidth_mhz * 1e6, ch.noise_figure_db
        )

    def environment(self) -> EnvironmentModel:
        sc, ch = self.scenario, self.channel
        regions = layout_regions(
            sc.num_uavs, sc.area, sc.altitude, sc.ue_height, sc.time_window, sc.profiles
        )
        return EnvironmentModel(
            bounds_low=(0.0, 0.0, 0.0),
            bounds_high=(sc.area[0], sc.area[1], sc.altitude),
            regions=regions,
            wavelength_m=self.antenna().wavelength_m,
            pilot_power_w=dbm_to_watts(ch.pilot_power_dbm),
            pilot_noise_var_w=self.noise_power_w(),
            misalignment_loss_db=ch.misalignment_loss_db,
            nlos_sine_spread=ch.nlos_sine_spread,
        )

    def constraints(self) -> ConstraintParams:
        tp = self.topology
        return ConstraintParams(
            snr_threshold=db_to_linear(tp.snr_threshold_db),
            tx_time_limit=tp.tx_time_limit,
            sample_scalars=tp.sample_scalars,
            share_ratio=tp.share_ratio,
            rb_budget=tp.rb_budget,
            bits_per_scalar=tp.bits_per_scalar,
            bandwidth_hz=tp.bandwidth_mhz * 1e6,
            carrier_hz=tp.carrier_ghz * 1e9,
            noise_psd_dbm_per_hz=tp.noise_psd_dbm_per_hz,
        )

    def nodes(self) -> list[UavNode]:
        """UAVs at their regions' hover points with O_i split from B."""
        sc = self.scenario
        budgets = split_rb_budget(self.topology.rb_budget, sc.num_uavs)
        regions = layout_regions(
            sc.num_uavs, sc.area, sc.altitude, sc.ue_height, sc.time_window, sc.profiles
        )
        return [
            UavNode(
                id=region.index,
                position=region.hover,
                dataset_size=sc.dataset_size,
                max_power_w=dbm_to_watts(sc.uav_max_power_dbm),
                out_budget=budget,
            )
            for region, budget in zip(regions, budgets)
        ]

    def grid(self) -> BinGrid:
        sc, lr = self.scenario, self.learning
        return BinGrid.default(
            sc.area,
            sc.altitude,
            sc.time_window,
            spatial_bins=lr.spatial_bins,
            time_bins=lr.time_bins,
            gain_bins=lr.gain_bins,
            gain_threshold=lr.gain_threshold,
            gain_max=lr.gain_max,
        )

    def learning_params(self) -> LearningParams:
        lr = self.learning
        return LearningParams(
            share_ratio=self.topology.share_ratio,
            disc_error=self.completion.disc_error,
            minibatch_size=lr.minibatch_size,
            exchange_mode=lr.exchange_mode,
            retain_received=lr.retain_received,
            log_floor=lr.log_floor,
        )

    def evaluation_params(self) -> EvaluationParams:
        ex = self.experiment
        return EvaluationParams(
            tx_power_w=dbm_to_watts(self.channel.pilot_power_dbm),
            noise_power_w=self.noise_power_w(),
            bandwidth_hz=self.channel.bandwidth_mhz * 1e6,
            draws=ex.eval_draws,
            map_radius_m=ex.map_radius_m,
            map_time_window_s=ex.map_time_window_s,
            confidence=ex.confidence_level,
        )


def _range_errors(config: ExperimentConfig) -> list[str]:
    sc, ch, tp = config.scenario, config.channel, config.topology
    cp, lr, ex = config.completion, config.learning, config.experiment
    checks = [
        (sc.num_uavs >= 1, f"scenario.num_uavs must be >= 1, got {sc.num_uavs}"),
        (min(sc.area) > 0, f"scenario.area must be positive, got {sc.area}"),
        (sc.altitude > sc.ue_height, "scenario.altitude must exceed scenario.ue_height"),
        (sc.time_window[1] > sc.time_window[0], "scenario.time_window must be non-empty"),
        (sc.dataset_size >= 1, f"scenario.dataset_size must be >= 1, got {sc.dataset_size}"),
        (len(sc.profiles) >= 1, "scenario.profiles must list at least one profile"),
        (ch.carrier_ghz > 0, f"channel.carrier_ghz must be positive, got {ch.carrier_ghz}"),
        (ch.tx_elements >= 1 and ch.rx_elements >= 1, "channel array sizes must be >= 1"),
        (len(ch.aod_sines) >= 1 and len(ch.aoa_sines) >= 1, "channel sine grids are empty"),
        (
            all(-1 <= s <= 1 for s in (*ch.aod_sines, *ch.aoa_sines)),
            "channel sine grids must lie in [-1, 1]",
        ),
        (ch.bandwidth_mhz > 0, "channel.bandwidth_mhz must be positive"),
        (ch.misalignment_loss_db >= 0, "channel.misalignment_loss_db must be >= 0"),
        (
            tp.rb_budget >= sc.num_uavs,
            f"topology.rb_budget ({tp.rb_budget}) must be >= scenario.num_uavs ({sc.num_uavs})",
        ),
        (0 < tp.share_ratio <= 1, f"topology.share_ratio must be in (0, 1], got {tp.share_ratio}"),
        (tp.tx_time_limit > 0, f"topology.tx_time_limit must be positive, got {tp.tx_time_limit}"),
        (tp.sample_scalars > 0, "topology.sample_scalars must be positive"),
        (tp.bandwidth_mhz > 0 and tp.carrier_ghz > 0, "topology bandwidth/carrier must be > 0"),
        (0 <= cp.disc_error < 1, f"completion.disc_error must be in [0, 1), got {cp.disc_error}"),
        (0 < cp.confidence < 1, f"completion.confidence must be in (0, 1), got {cp.confidence}"),
        (cp.train_time >= 0, "completion.train_time must be >= 0"),
        (cp.max_iterations >= 1, "completion.max_iterations must be >= 1"),
        (lr.minibatch_size >= 1, "learning.minibatch_size must be >= 1"),
        (lr.exchange_mode in EXCHANGE_MODES, f"learning.exchange_mode must be in {EXCHANGE_MODES}"),
        (0 < lr.log_floor < 1, "learning.log_floor must be in (0, 1)"),
        (lr.rounds is None or lr.rounds >= 0, "learning.rounds must be >= 0 or null"),
        (ex.format in ("csv", "json"), f"experiment.format must be csv or json, got {ex.format}"),
        (ex.n_jobs >= 1, "experiment.n_jobs must be >= 1"),
        (ex.replications >= 1, "experiment.replications must be >= 1"),
        (ex.spread_trials >= 1, "experiment.spread_trials must be >= 1"),
        (ex.model_param_count >= 1, "experiment.model_param_count must be >= 1"),
        (ex.eval_draws >= 1, "experiment.eval_draws must be >= 1"),
        (ex.map_radius_m >= 0, "experiment.map_radius_m must be >= 0"),
        (0 < ex.confidence_level < 1, "experiment.confidence_level must be in (0, 1)"),
        (
            all(size >= 1 for size in ex.comparison_sizes),
            "experiment.comparison_sizes must be >= 1",
        ),
        (
            set(ex.sweep) <= set(SWEEP_AXES),
            f"experiment.sweep axes must be among {SWEEP_AXES}, got {sorted(ex.sweep)}",
        ),
    ]
    return [message for ok, message in checks if not ok]


def validate_config(config: ExperimentConfig) -> None:
    """
    Check every field against its range before any run.

    Raises:
        ConfigError: Listing every violation
    """
    errors = _range_errors(config)
    if errors:
        raise ConfigError("; ".join(errors))


def load_config(
    config: str = "defaults",
    config_path: str = "configs",
    overrides: Sequence[str] = (),
) -> ExperimentConfig:
    """
    Compose the hydra configuration and build the typed view.

    Args:
        config: "defaults" for <config_path>/config.yaml, or a path to a primary YAML file
        config_path: Configs directory used with "defaults"
        overrides: Hydra overrides such as "topology.rb_budget=8"

    Returns:
        Validated experiment configuration
    """
    if config == "defaults":
        config_dir, config_name = Path(config_path).absolute(), "config"
    else:
        path = Path(config).absolute()
        config_dir, config_name = path.parent, path.stem
    if not (config_dir / f"{config_name}.yaml").is_file():
        raise ConfigError(f"Config file not found: {config_dir / config_name}.yaml")

    try:
        with initialize_config_dir(config_dir=str(config_dir), version_base=None):
            cfg = compose(config_name=config_name, overrides=list(overrides))
    except (HydraException, OmegaConfBaseException) as e:
        raise ConfigError(f"Cannot compose configuration: {e}") from e
    return ExperimentConfig.from_dictconfig(cfg)
