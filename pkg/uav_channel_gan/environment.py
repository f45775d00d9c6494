"""Synthetic air-to-ground mmWave environment: regions, link states and path gains."""

from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np

from uav_channel_gan.antenna import Codebook, PathComponent
from uav_channel_gan.exceptions import ConfigError, ContractViolation

Vec3 = Tuple[float, float, float]


class LinkState(IntEnum):
    LOS = 0
    NLOS = 1
    OUTAGE = 2


@dataclass(frozen=True)
class RegionProfile:
    """
    Propagation profile of one area type.

    The LoS probability follows the elevation-angle law
    P_LoS = 1 / (1 + a * exp(-b * (theta - a))) with theta in degrees.
    """

    name: str
    los_a: float
    los_b: float
    excess_loss_los_db: float
    excess_loss_nlos_db: float
    shadowing_los_db: float
    shadowing_nlos_db: float
    nlos_outage_prob: float

    def __post_init__(self):
        if not 0.0 <= self.nlos_outage_prob <= 1.0:
            raise ConfigError(
                f"nlos_outage_prob must be in [0, 1] for profile '{self.name}', "
                f"got {self.nlos_outage_prob}"
            )
        if self.shadowing_los_db < 0 or self.shadowing_nlos_db < 0:
            raise ConfigError(f"Shadowing std must be non-negative for profile '{self.name}'")

    def los_probability(self, elevation_deg: np.ndarray | float) -> np.ndarray:
        exponent = np.clip(-self.los_b * (np.asarray(elevation_deg) - self.los_a), -50, 50)
        return 1.0 / (1.0 + self.los_a * np.exp(exponent))

    def state_probabilities(self, elevation_deg: float) -> np.ndarray:
        """Probabilities of (LoS, NLoS, outage); they sum to 1."""
        p_los = float(self.los_probability(elevation_deg))
        p_blocked = 1.0 - p_los
        return np.array(
            [
                p_los,
                p_blocked * (1.0 - self.nlos_outage_prob),
                p_blocked * self.nlos_outage_prob,
            ]
        )


@dataclass(frozen=True)
class Region:
    """Measurement region of one UAV: UE box, hover point, time window and profile."""

    index: int
    low: Vec3
    high: Vec3
    hover: Vec3
    time_window: Tuple[float, float]
    profile: RegionProfile

    def __post_init__(self):
        if any(h < l for l, h in zip(self.low, self.high)):
            raise ConfigError(f"Region {self.index} has an empty box {self.low} .. {self.high}")
        t0, t1 = self.time_window
        if not t1 > t0:
            raise ConfigError(f"Region {self.index} has an empty time window {self.time_window}")

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= np.asarray(self.low)) & (points <= np.asarray(self.high)), axis=1)

    def sample_ue(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(np.asarray(self.low), np.asarray(self.high))

    def sample_time(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(*self.time_window))


def link_geometry(uav_pos: np.ndarray, ue_pos: np.ndarray) -> Tuple[float, float, float, float]:
    """
    Geometry of the UAV -> UE link.

    Args:
        uav_pos: UAV position (x, y, z)
        ue_pos: UE position (x, y, z)

    Returns:
        Tuple of (elevation in degrees, 3D distance, sin(AoD), sin(AoA)); the UAV array lies
        along x and the UE array along y
    """
    dx, dy, dz = np.asarray(uav_pos, dtype=float) - np.asarray(ue_pos, dtype=float)
    if dz <= 0:
        raise ContractViolation(f"UAV must be above the UE, got height difference {dz}")
    horizontal = np.hypot(dx, dy)
    elevation = float(np.degrees(np.arctan2(dz, horizontal)))
    distance = float(np.sqrt(horizontal**2 + dz**2))
    aod_sine = float(-dx / np.hypot(dx, dz))
    aoa_sine = float(-dy / np.hypot(dy, dz))
    return elevation, distance, aod_sine, aoa_sine


@dataclass(frozen=True)
class EnvironmentModel:
    """Ground-truth environment shared by dataset collection and online evaluation."""

    bounds_low: Vec3
    bounds_high: Vec3
    regions: Tuple[Region, ...]
    wavelength_m: float
    pilot_power_w: float
    pilot_noise_var_w: float
    misalignment_loss_db: float = 45.0
    nlos_sine_spread: float = 0.3

    def __post_init__(self):
        if not self.regions:
            raise ConfigError("Environment needs at least one region")
        if self.pilot_power_w < 0 or self.pilot_noise_var_w <= 0:
            raise ConfigError(
                f"Invalid pilot power {self.pilot_power_w} W or noise {self.pilot_noise_var_w} W"
            )
        lo, hi = np.asarray(self.bounds_low), np.asarray(self.bounds_high)
        for region in self.regions:
            if np.any(np.asarray(region.low) < lo) or np.any(np.asarray(region.high) > hi):
                raise ConfigError(f"Region {region.index} lies outside the environment bounds")

    @property
    def num_regions(self) -> int:
        return len(self.regions)

    def region(self, index: int) -> Region:
        if not 0 <= index < len(self.regions):
            raise ContractViolation(f"Region index {index} outside [0, {len(self.regions)})")
        return self.regions[index]

    def draw_path(
        self,
        uav_pos: np.ndarray,
        ue_pos: np.ndarray,
        profile: RegionProfile,
        rng: np.random.Generator,
    ) -> Tuple[PathComponent, LinkState]:
        """
        Draw the single propagation path of one link realization.

        Args:
            uav_pos: UAV position
            ue_pos: UE position
            profile: Propagation profile of the area
            rng: Random generator

        Returns:
            Tuple of (path component, link state)
        """
        elevation, distance, aod_sine, aoa_sine = link_geometry(uav_pos, ue_pos)
        probs = profile.state_probabilities(elevation)
        u = rng.random()
        state = LinkState(min(int(np.searchsorted(np.cumsum(probs), u, side="right")), 2))
        shadow = rng.standard_normal()
        phase = rng.uniform(0.0, 2 * np.pi)
        jitter = rng.uniform(-self.nlos_sine_spread, self.nlos_sine_spread, size=2)

        if state == LinkState.OUTAGE:
            gain = 0.0 + 0.0j
        else:
            fspl_db = 20.0 * np.log10(4 * np.pi * distance / self.wavelength_m)
            if state == LinkState.LOS:
                loss_db = fspl_db + profile.excess_loss_los_db
                loss_db += profile.shadowing_los_db * shadow
            else:
                loss_db = fspl_db + profile.excess_loss_nlos_db
                loss_db += profile.shadowing_nlos_db * shadow
                aod_sine, aoa_sine = np.clip(np.array([aod_sine, aoa_sine]) + jitter, -1.0, 1.0)
            gain = 10.0 ** (-loss_db / 20.0) * np.exp(1j * phase)

        path = PathComponent(complex(gain), float(np.arcsin(aod_sine)), float(np.arcsin(aoa_sine)))
        return path, state

    def true_beam_gains(self, path: PathComponent, codebook: Codebook) -> np.ndarray:
        """
        Gain seen along every codebook pair for one path (sector-beam model).

        The pair closest to the path direction carries the full path gain; every other pair
        sees it attenuated by the misalignment loss.
        """
        aligned = int(codebook.nearest_index(np.sin(path.aod), np.sin(path.aoa))[0])
        gains = np.full(codebook.size, path.gain * 10.0 ** (-self.misalignment_loss_db / 20.0))
        gains[aligned - 1] = path.gain
        return gains.astype(np.complex128)
