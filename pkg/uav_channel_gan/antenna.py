"""Antenna arrays, codebook and pilot-based gain estimation."""

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from uav_channel_gan.exceptions import ContractViolation, SingularBeamformingError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class AntennaConfig:
    """Uniform linear arrays at the UAV (transmit) and UE (receive) side."""

    tx_elements: int
    rx_elements: int
    wavelength_m: float
    element_phase_unit: float = np.pi

    def __post_init__(self):
        if self.tx_elements < 1 or self.rx_elements < 1:
            raise ContractViolation(
                f"Array sizes must be positive, got M={self.tx_elements}, N={self.rx_elements}"
            )
        if self.wavelength_m <= 0:
            raise ContractViolation(f"Wavelength must be positive, got {self.wavelength_m}")

    @classmethod
    def from_carrier(
        cls,
        tx_elements: int,
        rx_elements: int,
        carrier_hz: float,
        element_phase_unit: float = np.pi,
    ) -> "AntennaConfig":
        return cls(tx_elements, rx_elements, SPEED_OF_LIGHT / carrier_hz, element_phase_unit)


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: complex gain plus departure/arrival angles in [0, 2pi)."""

    gain: complex
    aod: float
    aoa: float

    def __post_init__(self):
        if not np.isfinite(self.gain):
            raise ContractViolation(f"Path gain must be finite, got {self.gain}")
        object.__setattr__(self, "aod", float(np.mod(self.aod, 2 * np.pi)))
        object.__setattr__(self, "aoa", float(np.mod(self.aoa, 2 * np.pi)))


def steering_vector(angle: float, elements: int, phase_unit: float = np.pi) -> np.ndarray:
    """
    Array response of a uniform linear array.

    Args:
        angle: Steering angle in radians
        elements: Number of array elements
        phase_unit: Per-element phase per unit sin(angle)

    Returns:
        Complex vector whose entry m is exp(j * m * phase_unit * sin(angle))
    """
    if elements < 1:
        raise ContractViolation(f"Array needs at least one element, got {elements}")
    m = np.arange(elements)
    return np.exp(1j * m * phase_unit * np.sin(angle))


def mimo_channel(paths: Sequence[PathComponent], cfg: AntennaConfig) -> np.ndarray:
    """
    Narrowband MIMO channel matrix of shape (N_rx, M).

    Args:
        paths: Non-empty list of path components
        cfg: Antenna configuration

    Returns:
        H = sum_l alpha_l * a_r(aoa_l) * a_t(aod_l)^H
    """
    if not paths:
        raise ContractViolation("Channel needs at least one path")
    H = np.zeros((cfg.rx_elements, cfg.tx_elements), dtype=np.complex128)
    for path in paths:
        a_t = steering_vector(path.aod, cfg.tx_elements, cfg.element_phase_unit)
        a_r = steering_vector(path.aoa, cfg.rx_elements, cfg.element_phase_unit)
        H += path.gain * np.outer(a_r, a_t.conj())
    return H


def received_pilot(
    H: np.ndarray, w: np.ndarray, q: np.ndarray, power: float, noise: np.ndarray
) -> complex:
    """
    Pilot observed at the UE after receive combining.

    Args:
        H: Channel matrix (N_rx, M)
        w: Beamforming vector (M,)
        q: Combining vector (N_rx,)
        power: Pilot power in watts
        noise: Receiver noise vector (N_rx,)

    Returns:
        sqrt(P) * q^H H w + q^H n
    """
    if H.shape != (q.shape[0], w.shape[0]) or noise.shape != q.shape:
        raise ContractViolation(
            f"Dimension mismatch: H{H.shape}, w{w.shape}, q{q.shape}, n{noise.shape}"
        )
    return complex(np.sqrt(power) * np.vdot(q, H @ w) + np.vdot(q, noise))


def beta_coefficient(
    w: np.ndarray,
    q: np.ndarray,
    a_t: np.ndarray,
    a_r: np.ndarray,
    power: float,
    kronecker_form: bool = False,
) -> complex:
    """
    Scalar linking the path gain to the received pilot for one codebook pair.

    Args:
        w: Beamforming vector (M,)
        q: Combining vector (N_rx,)
        a_t: Transmit steering vector (M,)
        a_r: Receive steering vector (N_rx,)
        power: Pilot power in watts
        kronecker_form: Evaluate (w^T kron q^H)(a_t^* kron a_r) instead of the factored form

    Returns:
        beta = sqrt(P) * (w^T a_t^*) * (q^H a_r)
    """
    if w.shape != a_t.shape or q.shape != a_r.shape:
        raise ContractViolation(
            f"Vector lengths disagree: w{w.shape} vs a_t{a_t.shape}, q{q.shape} vs a_r{a_r.shape}"
        )
    if kronecker_form:
        value = np.kron(w, q.conj()) @ np.kron(a_t.conj(), a_r)
    else:
        value = (w @ a_t.conj()) * np.vdot(q, a_r)
    return complex(np.sqrt(power) * value)


def estimate_gain(r: complex, beta: complex) -> complex:
    """Least-squares gain estimate r / beta."""
    if beta == 0:
        raise SingularBeamformingError("Beamforming coefficient is zero")
    return complex(r / beta)


@dataclass(frozen=True)
class Codebook:
    """
    Ordered beamforming/combining pairs; pair k (1-based) is learning condition k.

    Vectors are steering vectors toward the pair's angles, so every entry has unit modulus.
    """

    antenna: AntennaConfig
    aod: np.ndarray
    aoa: np.ndarray
    tx_vectors: np.ndarray = field(repr=False)
    rx_vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        K = len(self.aod)
        if K < 1 or len(self.aoa) != K:
            raise ContractViolation(f"Codebook needs matching non-empty angle lists, got {K}")
        if self.tx_vectors.shape != (K, self.antenna.tx_elements):
            raise ContractViolation(f"tx_vectors shape {self.tx_vectors.shape} is not (K, M)")
        if self.rx_vectors.shape != (K, self.antenna.rx_elements):
            raise ContractViolation(f"rx_vectors shape {self.rx_vectors.shape} is not (K, N)")
        if not (
            np.allclose(np.abs(self.tx_vectors), 1.0) and np.allclose(np.abs(self.rx_vectors), 1.0)
        ):
            raise ContractViolation("Codebook vectors must have unit-modulus entries")
        pairs = {(round(t, 12), round(r, 12)) for t, r in zip(self.aod, self.aoa)}
        if len(pairs) != K:
            raise ContractViolation("Codebook angle pairs must be unique")

    @classmethod
    def from_sine_grid(
        cls, antenna: AntennaConfig, aod_sines: Sequence[float], aoa_sines: Sequence[float]
    ) -> "Codebook":
        """
        Build the product codebook of AoD and AoA directions.

        Args:
            antenna: Array configuration
            aod_sines: sin(AoD) grid
            aoa_sines: sin(AoA) grid

        Returns:
            Codebook with K = len(aod_sines) * len(aoa_sines), AoD index varying slowest
        """
        st, sr = np.meshgrid(np.asarray(aod_sines), np.asarray(aoa_sines), indexing="ij")
        aod = np.mod(np.arcsin(st.ravel()), 2 * np.pi)
        aoa = np.mod(np.arcsin(sr.ravel()), 2 * np.pi)
        tx = np.stack(
            [steering_vector(a, antenna.tx_elements, antenna.element_phase_unit) for a in aod]
        )
        rx = np.stack(
            [steering_vector(a, antenna.rx_elements, antenna.element_phase_unit) for a in aoa]
        )
        return cls(antenna, aod, aoa, tx, rx)

    @property
    def size(self) -> int:
        return len(self.aod)

    def pair(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Beamforming and combining vectors of condition k (1-based)."""
        if not 1 <= k <= self.size:
            raise ContractViolation(f"Condition index {k} outside [1, {self.size}]")
        return self.tx_vectors[k - 1], self.rx_vectors[k - 1]

    def angles(self, k: int) -> Tuple[float, float]:
        if not 1 <= k <= self.size:
            raise ContractViolation(f"Condition index {k} outside [1, {self.size}]")
        return float(self.aod[k - 1]), float(self.aoa[k - 1])

    def nearest_index(self, aod_sine: np.ndarray, aoa_sine: np.ndarray) -> np.ndarray:
        """Condition index (1-based) whose direction is closest in sine space; ties go low."""
        st = np.atleast_1d(np.asarray(aod_sine, dtype=float))
        sr = np.atleast_1d(np.asarray(aoa_sine, dtype=float))
        dist = (st[:, None] - np.sin(self.aod)[None, :]) ** 2 + (
            sr[:, None] - np.sin(self.aoa)[None, :]
        ) ** 2
        return np.argmin(dist, axis=1) + 1
