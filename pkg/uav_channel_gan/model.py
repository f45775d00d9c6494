"""Empirical generative model and density-ratio discriminator over the joint bin table."""

import json
from pathlib import Path
from typing import Iterable, Tuple

import numpy as np

from uav_channel_gan.dataset import Dataset
from uav_channel_gan.exceptions import ContractViolation
from uav_channel_gan.transforms import BinGrid


class GenerativeModel:
    """
    Distribution over (condition, cell) pairs stored as a sparse joint table.

    Keys are (k - 1) * n_cells + cell, sorted and unique; weights are positive and sum to 1.
    Per-condition distributions are the conditionals of the joint table.
    """

    def __init__(self, grid: BinGrid, num_conditions: int, keys: np.ndarray, weights: np.ndarray):
        """
        Initialize model.

        Args:
            grid: Bin grid of the sample space
            num_conditions: Number of codebook conditions K
            keys: Joint keys (any order, duplicates are merged)
            weights: Non-negative weights, normalized on construction
        """
        keys = np.asarray(keys, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        if keys.shape != weights.shape:
            raise ContractViolation(f"keys {keys.shape} and weights {weights.shape} differ")
        if np.any(weights < 0):
            raise ContractViolation("Model weights must be non-negative")
        if keys.size and (keys.min() < 0 or keys.max() >= num_conditions * grid.n_cells):
            raise ContractViolation("Model keys outside the (condition, cell) table")
        unique, inverse = np.unique(keys, return_inverse=True)
        merged = np.bincount(inverse.ravel(), weights=weights, minlength=len(unique))
        keep = merged > 0
        total = merged[keep].sum()
        self.grid = grid
        self.num_conditions = num_conditions
        self.keys = unique[keep]
        self.weights = merged[keep] / total if total > 0 else merged[keep]

    @classmethod
    def from_dataset(cls, grid: BinGrid, dataset: Dataset) -> "GenerativeModel":
        cells = grid.cell_index(dataset.features())
        keys = (dataset.conditions() - 1) * grid.n_cells + cells
        return cls(grid, dataset.num_conditions, keys, np.ones(len(keys)))

    @classmethod
    def empty(cls, grid: BinGrid, num_conditions: int) -> "GenerativeModel":
        return cls(grid, num_conditions, np.zeros(0, dtype=np.int64), np.zeros(0))

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def is_empty(self) -> bool:
        return len(self.keys) == 0

    def compatible(self, other: "GenerativeModel") -> bool:
        return self.grid == other.grid and self.num_conditions == other.num_conditions

    def _check(self, other: "GenerativeModel") -> None:
        if not self.compatible(other):
            raise ContractViolation("Models are defined over different bins or conditions")

    def split_keys(self, keys: np.ndarray | None = None) -> Tuple[np.ndarray, np.ndarray]:
        """(condition index 1..K, cell) of every key."""
        keys = self.keys if keys is None else keys
        return keys // self.grid.n_cells + 1, keys % self.grid.n_cells

    def condition_mass(self) -> np.ndarray:
        """Marginal mass of conditions 1..K (index 0 is condition 1)."""
        conditions, _ = self.split_keys()
        return np.bincount(conditions - 1, weights=self.weights, minlength=self.num_conditions)

    def occupied_conditions(self) -> np.ndarray:
        return np.nonzero(self.condition_mass() > 0)[0] + 1

    def conditional(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Cells and probabilities of the distribution under condition k."""
        if not 1 <= k <= self.num_conditions:
            raise ContractViolation(f"Condition {k} outside [1, {self.num_conditions}]")
        conditions, cells = self.split_keys()
        mask = conditions == k
        mass = self.weights[mask].sum()
        if mass == 0:
            return cells[mask], self.weights[mask]
        return cells[mask], self.weights[mask] / mass

    def probability(self, keys: np.ndarray) -> np.ndarray:
        """Joint weights at arbitrary keys (0 where unsupported)."""
        keys = np.asarray(keys, dtype=np.int64)
        if self.is_empty:
            return np.zeros(keys.shape)
        pos = np.clip(np.searchsorted(self.keys, keys), 0, len(self.keys) - 1)
        return np.where(self.keys[pos] == keys, self.weights[pos], 0.0)

    def conditional_probability(self, keys: np.ndarray) -> np.ndarray:
        """Per-condition probabilities at arbitrary keys."""
        conditions, _ = self.split_keys(np.asarray(keys, dtype=np.int64))
        mass = self.condition_mass()[conditions - 1]
        joint = self.probability(keys)
        return np.divide(joint, mass, out=np.zeros_like(joint), where=mass > 0)

    @staticmethod
    def mix(components: Iterable[Tuple[float, "GenerativeModel"]]) -> "GenerativeModel":
        """
        Convex combination sum_c w_c * model_c on the union support.

        Args:
            components: (weight, model) pairs over identical bins and conditions

        Returns:
            Mixture model
        """
        components = [(w, m) for w, m in components]
        if not components:
            raise ContractViolation("Mixture needs at least one component")
        first = components[0][1]
        for _, model in components[1:]:
            first._check(model)
        keys = np.concatenate([m.keys for _, m in components])
        weights = np.concatenate([w * m.weights for w, m in components])
        return GenerativeModel(first.grid, first.num_conditions, keys, weights)

    def corruption(self) -> "GenerativeModel":
        """
        Training-error distribution: per condition, uniform over the occupied cells, keeping
        the condition marginal.
        """
        if self.is_empty:
            return self
        conditions, _ = self.split_keys()
        counts = np.bincount(conditions - 1, minlength=self.num_conditions)
        mass = self.condition_mass()
        weights = mass[conditions - 1] / counts[conditions - 1]
        return GenerativeModel(self.grid, self.num_conditions, self.keys, weights)

    def sample(
        self, n: int, rng: np.random.Generator, disc_error: float = 0.0
    ) -> "GenerativeModel":
        """
        Empirical model of n generated samples.

        Conditions are drawn uniformly over the occupied conditions and cells from the
        conditional; each sample is replaced by a uniform occupied cell of the same condition
        with probability disc_error.
        """
        if n <= 0 or self.is_empty:
            return GenerativeModel.empty(self.grid, self.num_conditions)
        occupied = self.occupied_conditions()
        drawn = rng.choice(occupied, size=n)
        keys = np.empty(n, dtype=np.int64)
        for k in np.unique(drawn):
            idx = np.nonzero(drawn == k)[0]
            cells, probs = self.conditional(int(k))
            picked = rng.choice(cells, size=len(idx), p=probs)
            corrupt = rng.random(len(idx)) < disc_error
            picked[corrupt] = rng.choice(cells, size=int(corrupt.sum()))
            keys[idx] = (k - 1) * self.grid.n_cells + picked
        return GenerativeModel(self.grid, self.num_conditions, keys, np.ones(n))

    def support(self) -> set[int]:
        return set(self.keys.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GenerativeModel):
            return NotImplemented
        return (
            self.compatible(other)
            and np.array_equal(self.keys, other.keys)
            and np.array_equal(self.weights, other.weights)
        )

    def allclose(self, other: "GenerativeModel", atol: float = 1e-12) -> bool:
        self._check(other)
        union = np.union1d(self.keys, other.keys)
        return bool(np.allclose(self.probability(union), other.probability(union), atol=atol))

    def to_dict(self) -> dict:
        return {
            "num_conditions": self.num_conditions,
            "grid_shape": list(self.grid.shape),
            "keys": self.keys.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, grid: BinGrid, data: dict) -> "GenerativeModel":
        if tuple(data["grid_shape"]) != grid.shape:
            raise ContractViolation(f"Snapshot grid {data['grid_shape']} != {list(grid.shape)}")
        model = cls.empty(grid, int(data["num_conditions"]))
        # stored weights are already normalized; keep them bit-exact
        model.keys = np.asarray(data["keys"], dtype=np.int64)
        model.weights = np.asarray(data["weights"], dtype=float)
        return model

    def save_json(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)


class Discriminator:
    """
    Density-ratio discriminator D(s | k) = f_b(s | k) / (f_b(s | k) + f_G(s | k)).

    Both conditionals are floored on the union support and renormalized per condition; the
    output is then corrupted at rate eps: D_eff = (1 - eps) D + eps / 2.
    """

    def __init__(
        self,
        mixture: GenerativeModel,
        generator: GenerativeModel,
        disc_error: float = 0.0,
        floor: float = 1e-9,
    ):
        mixture._check(generator)
        self.num_conditions = mixture.num_conditions
        self.n_cells = mixture.grid.n_cells
        self.keys = np.union1d(mixture.keys, generator.keys)
        self.disc_error = disc_error
        self.floor = floor

        conditions = self.keys // self.n_cells
        p = _floored_conditional(mixture, self.keys, conditions, floor)
        q = _floored_conditional(generator, self.keys, conditions, floor)
        raw = p / (p + q)
        self.values = (1.0 - disc_error) * raw + disc_error / 2.0

    def __call__(self, keys: np.ndarray) -> np.ndarray:
        """D at arbitrary keys; 1/2 outside the support."""
        keys = np.asarray(keys, dtype=np.int64)
        if len(self.keys) == 0:
            return np.full(keys.shape, 0.5)
        pos = np.clip(np.searchsorted(self.keys, keys), 0, len(self.keys) - 1)
        return np.where(self.keys[pos] == keys, self.values[pos], 0.5)

    def mean(self) -> float:
        return float(self.values.mean()) if len(self.values) else 0.5

    def max_deviation(self) -> float:
        return float(np.abs(self.values - 0.5).max()) if len(self.values) else 0.0


def _floored_conditional(
    model: GenerativeModel, keys: np.ndarray, conditions: np.ndarray, floor: float
) -> np.ndarray:
    p = model.conditional_probability(keys) + floor
    totals = np.bincount(conditions, weights=p)
    return p / totals[conditions]
