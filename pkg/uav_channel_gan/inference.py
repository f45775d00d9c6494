"""Online use of trained models: MAP beam selection and downlink-rate evaluation."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from tqdm import tqdm

from uav_channel_gan.antenna import Codebook
from uav_channel_gan.environment import EnvironmentModel
from uav_channel_gan.exceptions import ConfigError, ContractViolation
from uav_channel_gan.model import GenerativeModel

_UAV_AXES = slice(0, 3)
_UE_AXES = slice(3, 6)
_T_AXIS = 6


@dataclass(frozen=True)
class EvaluationParams:
    tx_power_w: float
    noise_power_w: float
    bandwidth_hz: float = 50e6
    draws: int = 1000
    map_radius_m: float = 25.0
    map_time_window_s: Optional[float] = None
    confidence: float = 0.95

    def __post_init__(self):
        if self.tx_power_w < 0:
            raise ConfigError(f"tx_power_w must be non-negative, got {self.tx_power_w}")
        if self.noise_power_w <= 0 or self.bandwidth_hz <= 0:
            raise ConfigError("Downlink noise power and bandwidth must be positive")
        if self.draws < 1:
            raise ConfigError(f"draws must be >= 1, got {self.draws}")
        if self.map_radius_m < 0:
            raise ConfigError(f"map_radius_m must be non-negative, got {self.map_radius_m}")
        if not 0 < self.confidence < 1:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")


@dataclass(frozen=True)
class BeamChoice:
    condition: int
    fallback: bool
    diagnostic: str = ""


class BeamSelector:
    """
    MAP beam selection on one generative model.

    Cell coordinates and representative powers are computed once, so repeated queries only
    filter the neighbourhood.
    """

    def __init__(
        self,
        model: GenerativeModel,
        radius_m: float = 25.0,
        time_window_s: Optional[float] = None,
    ):
        self.model = model
        self.radius_m = radius_m
        self.time_window_s = time_window_s
        self.conditions, cells = model.split_keys()
        self.coords = model.grid.coordinates(cells)
        reps = model.grid.representative(cells)
        self.ue_centres = reps[:, _UE_AXES]
        self.times = reps[:, _T_AXIS]
        self.power = reps[:, 7] ** 2 + reps[:, 8] ** 2
        self._global = self._argmax(np.ones(len(model), dtype=bool))

    def _argmax(self, mask: np.ndarray) -> Optional[int]:
        K = self.model.num_conditions
        weights = self.model.weights[mask]
        conditions = self.conditions[mask] - 1
        mass = np.bincount(conditions, weights=weights, minlength=K)
        if not np.any(mass > 0):
            return None
        energy = np.bincount(conditions, weights=weights * self.power[mask], minlength=K)
        score = np.full(K, -np.inf)
        score[mass > 0] = energy[mass > 0] / mass[mass > 0]
        return int(np.argmax(score)) + 1

    def select(self, uav_pos: Sequence[float], ue_pos: Sequence[float], t: float) -> BeamChoice:
        """
        k* = argmax_k E[|gain|^2 | neighbourhood of (uav, ue, t), k]; ties go to the lowest k.

        Args:
            uav_pos: Serving UAV position
            ue_pos: UE position
            t: Query time

        Returns:
            Selected condition, with a fallback flag when the neighbourhood is empty
        """
        if self.model.is_empty:
            raise ContractViolation("MAP beam selection needs a non-empty model")
        grid = self.model.grid
        query = np.array([[*uav_pos, *ue_pos, t, 0.0, 0.0]], dtype=float)
        q_coords = grid.coordinates(grid.cell_index(query))[0]
        q_ue = grid.representative(grid.cell_index(query))[0, _UE_AXES]

        mask = np.all(self.coords[:, _UAV_AXES] == q_coords[_UAV_AXES], axis=1)
        mask &= np.linalg.norm(self.ue_centres - q_ue, axis=1) <= self.radius_m
        if self.time_window_s is not None:
            mask &= np.abs(self.times - t) <= self.time_window_s

        k = self._argmax(mask)
        if k is not None:
            return BeamChoice(k, fallback=False)
        return BeamChoice(
            self._global,
            fallback=True,
            diagnostic=f"No samples near UAV {tuple(uav_pos)} / UE {tuple(ue_pos)}; "
            f"using global beam {self._global}",
        )


def map_beam_select(
    model: GenerativeModel,
    uav_pos: Sequence[float],
    ue_pos: Sequence[float],
    t: float,
    radius_m: float = 25.0,
    time_window_s: Optional[float] = None,
) -> BeamChoice:
    """One-off MAP query; use BeamSelector for repeated queries on the same model."""
    return BeamSelector(model, radius_m, time_window_s).select(uav_pos, ue_pos, t)


def downlink_rate(gain: complex, params: EvaluationParams, tx_elements: int, rx_elements: int):
    """Rate with power-normalized beams: w_b log2(1 + P |g|^2 M N / sigma^2)."""
    snr = params.tx_power_w * np.abs(gain) ** 2 * tx_elements * rx_elements / params.noise_power_w
    return params.bandwidth_hz * np.log2(1.0 + snr)


@dataclass(frozen=True)
class RateResult:
    label: str
    mean_bps: float
    ci_low_bps: float
    ci_high_bps: float
    rates: np.ndarray
    beam_agreement: float
    fallbacks: int

    def to_dict(self) -> dict:
        return {
            "method": self.label,
            "mean_rate_bps": self.mean_bps,
            "ci_low_bps": self.ci_low_bps,
            "ci_high_bps": self.ci_high_bps,
            "beam_agreement": self.beam_agreement,
            "fallbacks": self.fallbacks,
            "draws": len(self.rates),
        }


def confidence_interval(values: np.ndarray, confidence: float = 0.95) -> tuple[float, float]:
    """Student-t interval of the mean; degenerate samples give a zero-width interval."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    sem = float(stats.sem(values)) if len(values) > 1 else 0.0
    if sem == 0.0 or not np.isfinite(sem):
        return mean, mean
    low, high = stats.t.interval(confidence, len(values) - 1, loc=mean, scale=sem)
    return float(low), float(high)


def eval_downlink_rate(
    env: EnvironmentModel,
    codebook: Codebook,
    params: EvaluationParams,
    models: Optional[Sequence[GenerativeModel]],
    seed: int,
    label: str = "",
    show_progress: bool = False,
) -> RateResult:
    """
    Mean downlink rate over random UE placements.

    Each draw picks a target region and a serving UAV independently; the UAV hovers over the
    target region and serves a uniform UE there. The beam comes from exhaustive search on the
    true channel (models=None) or from MAP selection on the serving UAV's model. The draw
    sequence depends only on the seed, so methods evaluated with one seed see the same channels.

    Args:
        env: Ground-truth environment
        codebook: Beam codebook
        params: Evaluation parameters
        models: Per-UAV models indexed like env.regions, or None for perfect CSI
        seed: Seed of the draw sequence
        label: Method name stored in the result
        show_progress: Show a progress bar

    Returns:
        Rate statistics
    """
    I = env.num_regions
    if models is not None and len(models) != I:
        raise ContractViolation(f"Expected {I} models, got {len(models)}")
    selectors = (
        None
        if models is None
        else [BeamSelector(m, params.map_radius_m, params.map_time_window_s) for m in models]
    )
    label = label or ("perfect_csi" if models is None else "model")
    M, N = codebook.antenna.tx_elements, codebook.antenna.rx_elements

    rng = np.random.default_rng(seed)
    rates = np.empty(params.draws)
    agree = 0
    fallbacks = 0
    for d in tqdm(range(params.draws), desc=f"Evaluating {label}", disable=not show_progress):
        region = env.region(int(rng.integers(I)))
        serving = int(rng.integers(I))
        ue = region.sample_ue(rng)
        t = region.sample_time(rng)
        uav = np.asarray(region.hover, dtype=float)
        path, _ = env.draw_path(uav, ue, region.profile, rng)
        gains = env.true_beam_gains(path, codebook)
        best = int(np.argmax(np.abs(gains))) + 1

        if selectors is None:
            k = best
        else:
            choice = selectors[serving].select(uav, ue, t)
            k = choice.condition
            fallbacks += choice.fallback
        agree += k == best
        rates[d] = downlink_rate(gains[k - 1], params, M, N)

    low, high = confidence_interval(rates, params.confidence)
    result = RateResult(
        label, float(rates.mean()), low, high, rates, agree / params.draws, fallbacks
    )
    print(
        f"{label}: mean rate {result.mean_bps / 1e6:.2f} Mbit/s "
        f"[{low / 1e6:.2f}, {high / 1e6:.2f}], beam agreement {result.beam_agreement:.3f}"
    )
    if fallbacks:
        print(f"Warning: {fallbacks} of {params.draws} MAP queries used the global beam")
    return result
