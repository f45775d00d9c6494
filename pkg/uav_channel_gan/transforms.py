"""Discretization of channel samples into a joint bin grid."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from uav_channel_gan.exceptions import ConfigError, ContractViolation

FEATURE_NAMES = ("uav_x", "uav_y", "uav_z", "ue_x", "ue_y", "ue_z", "t", "re_gain", "im_gain")


@dataclass(frozen=True)
class LinearAxis:
    """Equal-width bins over [low, high]; values outside are clipped to the end bins."""

    name: str
    low: float
    high: float
    bins: int

    def __post_init__(self):
        if self.bins < 1:
            raise ConfigError(f"Axis '{self.name}' needs at least one bin")
        if not self.high > self.low:
            raise ConfigError(f"Axis '{self.name}' has empty range [{self.low}, {self.high}]")

    def index(self, values: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(values, dtype=float) - self.low) / (self.high - self.low)
        return np.clip(np.floor(scaled * self.bins), 0, self.bins - 1).astype(np.int64)

    def representative(self, idx: np.ndarray) -> np.ndarray:
        width = (self.high - self.low) / self.bins
        return self.low + (np.asarray(idx) + 0.5) * width


@dataclass(frozen=True)
class SymLogAxis:
    """
    Symmetric-log bins for signed gains.

    Each sign gets one bin [0, threshold) and bins/2 - 1 log-spaced bins up to `high`.
    """

    name: str
    threshold: float
    high: float
    bins: int

    def __post_init__(self):
        if self.bins < 4 or self.bins % 2:
            raise ConfigError(f"Axis '{self.name}' needs an even bin count >= 4, got {self.bins}")
        if not 0 < self.threshold < self.high:
            raise ConfigError(f"Axis '{self.name}' needs 0 < threshold < high")

    @property
    def _half(self) -> int:
        return self.bins // 2

    @property
    def _log_step(self) -> float:
        return np.log(self.high / self.threshold) / (self._half - 1)

    def index(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        magnitude = np.abs(values)
        with np.errstate(divide="ignore"):
            ratio = np.maximum(magnitude, 1e-300) / self.threshold
            level = np.floor(np.log(ratio) / self._log_step)
        offset = np.where(magnitude < self.threshold, 0, 1 + np.clip(level, 0, self._half - 2))
        offset = offset.astype(np.int64)
        return np.where(values >= 0, self._half + offset, self._half - 1 - offset)

    def representative(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        positive = idx >= self._half
        offset = np.where(positive, idx - self._half, self._half - 1 - idx)
        lower = self.threshold * np.exp((offset - 1) * self._log_step)
        magnitude = np.where(offset == 0, self.threshold / 2, lower * np.exp(self._log_step / 2))
        return np.where(positive, magnitude, -magnitude)


class BinGrid:
    """Joint grid over (UAV xyz, UE xyz, t, Re gain, Im gain); cells are flat int64 indices."""

    def __init__(self, axes: Sequence[LinearAxis | SymLogAxis]):
        if len(axes) != len(FEATURE_NAMES):
            raise ConfigError(f"BinGrid needs {len(FEATURE_NAMES)} axes, got {len(axes)}")
        self.axes = tuple(axes)
        self.shape = tuple(axis.bins for axis in self.axes)
        self.n_cells = int(np.prod(self.shape, dtype=np.int64))

    def __eq__(self, other) -> bool:
        return isinstance(other, BinGrid) and self.axes == other.axes

    def __hash__(self) -> int:
        return hash(self.axes)

    @classmethod
    def default(
        cls,
        area: Sequence[float],
        altitude: float,
        time_window: Sequence[float],
        spatial_bins: int = 16,
        time_bins: int = 8,
        gain_bins: int = 16,
        gain_threshold: float = 1e-9,
        gain_max: float = 1e-4,
    ) -> "BinGrid":
        def spatial(name: str, high: float) -> LinearAxis:
            return LinearAxis(name, 0.0, float(high), spatial_bins)

        return cls(
            [
                spatial("uav_x", area[0]),
                spatial("uav_y", area[1]),
                spatial("uav_z", altitude * 1.2),
                spatial("ue_x", area[0]),
                spatial("ue_y", area[1]),
                spatial("ue_z", altitude * 1.2),
                LinearAxis("t", float(time_window[0]), float(time_window[1]), time_bins),
                SymLogAxis("re_gain", gain_threshold, gain_max, gain_bins),
                SymLogAxis("im_gain", gain_threshold, gain_max, gain_bins),
            ]
        )

    def cell_index(self, features: np.ndarray) -> np.ndarray:
        """Flat cell index of every row of an (S, 9) feature matrix."""
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != len(self.axes):
            raise ContractViolation(f"Expected {len(self.axes)} features, got {features.shape[1]}")
        coords = [axis.index(features[:, a]) for a, axis in enumerate(self.axes)]
        return np.ravel_multi_index(coords, self.shape).astype(np.int64)

    def coordinates(self, cells: np.ndarray) -> np.ndarray:
        """Per-axis bin indices, shape (n, 9)."""
        return np.stack(np.unravel_index(np.asarray(cells, dtype=np.int64), self.shape), axis=1)

    def representative(self, cells: np.ndarray) -> np.ndarray:
        """Representative feature values of cells, shape (n, 9)."""
        coords = self.coordinates(cells)
        return np.stack(
            [axis.representative(coords[:, a]) for a, axis in enumerate(self.axes)], axis=1
        )
