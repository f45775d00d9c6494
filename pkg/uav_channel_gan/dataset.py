"""Channel samples, per-UAV datasets and pilot-based dataset collection."""

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

from uav_channel_gan.antenna import (
    Codebook,
    PathComponent,
    beta_coefficient,
    estimate_gain,
    mimo_channel,
    received_pilot,
    steering_vector,
)
from uav_channel_gan.environment import EnvironmentModel, Region
from uav_channel_gan.exceptions import ConfigError, ContractViolation

CSV_COLUMNS = [
    "owner",
    "x",
    "y",
    "z_uav",
    "x_ue",
    "y_ue",
    "z_ue",
    "t",
    "re_gain",
    "im_gain",
    "cond_idx",
]


@dataclass(frozen=True)
class ChannelSample:
    """One measured tuple (x, y, t, gain estimate) under codebook condition k."""

    uav_pos: Tuple[float, float, float]
    ue_pos: Tuple[float, float, float]
    time: float
    gain_est: complex
    condition_idx: int

    def __post_init__(self):
        if not (np.all(np.isfinite(self.uav_pos)) and np.all(np.isfinite(self.ue_pos))):
            raise ContractViolation(
                f"Sample positions must be finite: {self.uav_pos}, {self.ue_pos}"
            )
        if self.condition_idx < 1:
            raise ContractViolation(f"Condition index must be >= 1, got {self.condition_idx}")


class Dataset:
    """Channel dataset S_i owned by one UAV."""

    def __init__(self, owner_id: int, samples: Sequence[ChannelSample], num_conditions: int):
        """
        Initialize dataset.

        Args:
            owner_id: Identifier of the owning UAV
            samples: Channel samples
            num_conditions: Codebook size K; every condition index must lie in [1, K]
        """
        bad = [s.condition_idx for s in samples if not 1 <= s.condition_idx <= num_conditions]
        if bad:
            raise ContractViolation(f"Condition indices {bad[:5]} outside [1, {num_conditions}]")
        self.owner_id = owner_id
        self.samples = list(samples)
        self.num_conditions = num_conditions

    def __len__(self) -> int:
        return len(self.samples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.owner_id == other.owner_id
            and self.num_conditions == other.num_conditions
            and self.samples == other.samples
        )

    @property
    def size(self) -> int:
        return len(self.samples)

    def features(self) -> np.ndarray:
        """Sample matrix (S, 9): UAV xyz, UE xyz, t, Re gain, Im gain."""
        return np.array(
            [
                [*s.uav_pos, *s.ue_pos, s.time, s.gain_est.real, s.gain_est.imag]
                for s in self.samples
            ],
            dtype=float,
        ).reshape(-1, 9)

    def conditions(self) -> np.ndarray:
        return np.array([s.condition_idx for s in self.samples], dtype=np.int64)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """Component-wise (min, max) of the UE positions."""
        ue = np.array([s.ue_pos for s in self.samples], dtype=float)
        return ue.min(axis=0), ue.max(axis=0)

    def to_rows(self) -> list[dict]:
        return [
            {
                "owner": self.owner_id,
                "x": repr(s.uav_pos[0]),
                "y": repr(s.uav_pos[1]),
                "z_uav": repr(s.uav_pos[2]),
                "x_ue": repr(s.ue_pos[0]),
                "y_ue": repr(s.ue_pos[1]),
                "z_ue": repr(s.ue_pos[2]),
                "t": repr(s.time),
                "re_gain": repr(s.gain_est.real),
                "im_gain": repr(s.gain_est.imag),
                "cond_idx": s.condition_idx,
            }
            for s in self.samples
        ]

    def to_dict(self) -> dict:
        return {
            "owner": self.owner_id,
            "num_conditions": self.num_conditions,
            "samples": [
                {
                    "uav_pos": list(s.uav_pos),
                    "ue_pos": list(s.ue_pos),
                    "t": s.time,
                    "gain": [s.gain_est.real, s.gain_est.imag],
                    "cond_idx": s.condition_idx,
                }
                for s in self.samples
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dataset":
        samples = [
            ChannelSample(
                uav_pos=tuple(float(v) for v in s["uav_pos"]),
                ue_pos=tuple(float(v) for v in s["ue_pos"]),
                time=float(s["t"]),
                gain_est=complex(float(s["gain"][0]), float(s["gain"][1])),
                condition_idx=int(s["cond_idx"]),
            )
            for s in data["samples"]
        ]
        return cls(int(data["owner"]), samples, int(data["num_conditions"]))


def collect_dataset(
    env: EnvironmentModel,
    codebook: Codebook,
    region: Region,
    size: int,
    seed: int | np.random.SeedSequence,
    owner_id: int | None = None,
) -> Dataset:
    """
    Collect a channel dataset by codebook pilot training inside one region.

    Args:
        env: Ground-truth environment
        codebook: Beamforming/combining codebook
        region: Measurement region (UE box, hover point, time window)
        size: Number of samples S
        seed: Random seed
        owner_id: Owning UAV (defaults to the region index)

    Returns:
        Dataset with `size` samples
    """
    if size < 1:
        raise ConfigError(f"Dataset size must be >= 1, got {size}")
    antenna = codebook.antenna
    rng = np.random.default_rng(seed)
    uav = np.asarray(region.hover, dtype=float)
    noise_std = np.sqrt(env.pilot_noise_var_w / 2.0)
    samples = []

    for _ in range(size):
        ue = region.sample_ue(rng)
        t = region.sample_time(rng)
        path, _ = env.draw_path(uav, ue, region.profile, rng)
        k = int(rng.integers(1, codebook.size + 1))
        true_gain = env.true_beam_gains(path, codebook)[k - 1]

        aod_k, aoa_k = codebook.angles(k)
        H = mimo_channel([PathComponent(true_gain, aod_k, aoa_k)], antenna)
        w, q = codebook.pair(k)
        noise = noise_std * (
            rng.standard_normal(antenna.rx_elements) + 1j * rng.standard_normal(antenna.rx_elements)
        )
        r = received_pilot(H, w, q, env.pilot_power_w, noise)
        a_t = steering_vector(aod_k, antenna.tx_elements, antenna.element_phase_unit)
        a_r = steering_vector(aoa_k, antenna.rx_elements, antenna.element_phase_unit)
        beta = beta_coefficient(w, q, a_t, a_r, env.pilot_power_w)

        samples.append(
            ChannelSample(
                uav_pos=tuple(float(v) for v in uav),
                ue_pos=tuple(float(v) for v in ue),
                time=t,
                gain_est=estimate_gain(r, beta),
                condition_idx=k,
            )
        )

    return Dataset(region.index if owner_id is None else owner_id, samples, codebook.size)


def pool_datasets(datasets: Iterable[Dataset], owner_id: int = -1) -> Dataset:
    """Concatenate datasets into one pooled dataset."""
    datasets = list(datasets)
    if not datasets:
        raise ContractViolation("Nothing to pool")
    samples = [s for d in datasets for s in d.samples]
    return Dataset(owner_id, samples, datasets[0].num_conditions)


def save_datasets_csv(datasets: Sequence[Dataset], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for dataset in datasets:
            writer.writerows(dataset.to_rows())


def load_datasets_csv(path: Path | str, num_conditions: int) -> list[Dataset]:
    """
    Read datasets written by save_datasets_csv, grouped by owner in file order.

    Args:
        path: CSV file
        num_conditions: Codebook size K

    Returns:
        List of datasets
    """
    grouped: dict[int, list[ChannelSample]] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(line for line in f if not line.startswith("#")):
            sample = ChannelSample(
                uav_pos=(float(row["x"]), float(row["y"]), float(row["z_uav"])),
                ue_pos=(float(row["x_ue"]), float(row["y_ue"]), float(row["z_ue"])),
                time=float(row["t"]),
                gain_est=complex(float(row["re_gain"]), float(row["im_gain"])),
                condition_idx=int(row["cond_idx"]),
            )
            grouped.setdefault(int(row["owner"]), []).append(sample)
    return [Dataset(owner, samples, num_conditions) for owner, samples in grouped.items()]


def save_datasets_json(datasets: Sequence[Dataset], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump({"datasets": [d.to_dict() for d in datasets]}, f, indent=2)


def load_datasets_json(path: Path | str) -> list[Dataset]:
    with open(path) as f:
        data = json.load(f)
    return [Dataset.from_dict(d) for d in data["datasets"]]
