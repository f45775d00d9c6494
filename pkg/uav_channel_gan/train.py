"""Distributed generative-exchange protocol: mixtures, rounds and equilibrium verification."""

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from tqdm import tqdm

from uav_channel_gan.dataset import Dataset, pool_datasets
from uav_channel_gan.exceptions import ContractViolation, ProtocolError
from uav_channel_gan.metrics import (
    minibatch_value,
    model_divergence,
    support_fraction,
    total_utility,
    value_function,
)
from uav_channel_gan.model import Discriminator, GenerativeModel
from uav_channel_gan.topology import UavGraph
from uav_channel_gan.transforms import BinGrid
from uav_channel_gan.utils import log_mlflow_metrics, spawn_generators

EXCHANGE_MODES = ("expected", "sampled")


@dataclass(frozen=True)
class MixtureWeights:
    own: float
    neighbors: dict[int, float]

    def __post_init__(self):
        values = [self.own, *self.neighbors.values()]
        if any(v < 0 for v in values):
            raise ContractViolation(f"Mixture weights must be non-negative: {values}")
        if not np.isclose(sum(values), 1.0, atol=1e-12):
            raise ContractViolation(f"Mixture weights sum to {sum(values)}, expected 1")


def mixture_weights(
    own_size: int, neighbor_sizes: Mapping[int, int], share_ratio: float
) -> MixtureWeights:
    """
    pi_i = S_i / (S_i + eta sum S_j) and pi_ij = eta S_j / (S_i + eta sum S_j).

    Args:
        own_size: Local dataset size S_i
        neighbor_sizes: Dataset sizes of the in-neighbours
        share_ratio: Share ratio eta

    Returns:
        Mixture weights
    """
    if own_size < 1 or any(s < 1 for s in neighbor_sizes.values()):
        raise ContractViolation("Dataset sizes must be >= 1")
    if not 0 <= share_ratio <= 1:
        raise ContractViolation(f"share_ratio must be in [0, 1], got {share_ratio}")
    total = own_size + share_ratio * sum(neighbor_sizes.values())
    return MixtureWeights(
        own=own_size / total,
        neighbors={j: share_ratio * s / total for j, s in neighbor_sizes.items()},
    )


def mixture_distribution(
    local: GenerativeModel,
    neighbor_models: Mapping[int, GenerativeModel],
    weights: MixtureWeights,
) -> GenerativeModel:
    """f_b = pi_i f_i + sum_j pi_ij f_G_j on the union support."""
    if set(neighbor_models) != set(weights.neighbors):
        raise ContractViolation(
            f"Neighbour models {sorted(neighbor_models)} do not match weights "
            f"{sorted(weights.neighbors)}"
        )
    components = [(weights.own, local)]
    components += [(weights.neighbors[j], neighbor_models[j]) for j in sorted(neighbor_models)]
    return GenerativeModel.mix(c for c in components if c[0] > 0 and not c[1].is_empty)


@dataclass(frozen=True)
class LearningParams:
    share_ratio: float
    disc_error: float
    minibatch_size: int = 128
    exchange_mode: str = "expected"
    retain_received: bool = True
    log_floor: float = 1e-9

    def __post_init__(self):
        if not 0 <= self.share_ratio <= 1:
            raise ContractViolation(f"share_ratio must be in [0, 1], got {self.share_ratio}")
        if not 0 <= self.disc_error < 1:
            raise ContractViolation(f"disc_error must be in [0, 1), got {self.disc_error}")
        if self.minibatch_size < 1:
            raise ContractViolation(f"minibatch_size must be >= 1, got {self.minibatch_size}")
        if self.exchange_mode not in EXCHANGE_MODES:
            raise ContractViolation(f"exchange_mode must be one of {EXCHANGE_MODES}")
        if not 0 < self.log_floor < 1:
            raise ContractViolation(f"log_floor must be in (0, 1), got {self.log_floor}")


@dataclass
class LearningState:
    """One UAV's learner: local data, owned pool, generator and discriminator."""

    uav_id: int
    dataset_size: int
    local: GenerativeModel
    owned: GenerativeModel
    generator: GenerativeModel
    mixture: GenerativeModel
    discriminator: Discriminator
    rng: np.random.Generator
    iteration: int = 0
    received: dict[int, int] = field(default_factory=dict)
    value: float = -2 * np.log(2)


def init_states(
    datasets: Sequence[Dataset], grid: BinGrid, seed: int
) -> list[LearningState]:
    """Learners initialized on their local data, with independent child generators."""
    generators = spawn_generators(seed, len(datasets))
    states = []
    for dataset, rng in zip(datasets, generators):
        local = GenerativeModel.from_dataset(grid, dataset)
        states.append(
            LearningState(
                uav_id=dataset.owner_id,
                dataset_size=dataset.size,
                local=local,
                owned=local,
                generator=local,
                mixture=local,
                discriminator=Discriminator(local, local),
                rng=rng,
            )
        )
    return states


def exchanged_count(emitter: LearningState, params: LearningParams) -> int:
    """Samples an emitter ships to each out-neighbour per round: round(eta S_j)."""
    return int(round(params.share_ratio * emitter.dataset_size))


def emit_batch(state: LearningState, params: LearningParams) -> GenerativeModel:
    """
    Generated batch sent to one out-neighbour.

    Each generated sample is replaced with probability eps by a uniform occupied cell of the
    same condition.
    """
    eps = params.disc_error
    if params.exchange_mode == "sampled":
        n = exchanged_count(state, params)
        return state.generator.sample(n, state.rng, disc_error=eps)
    if eps == 0:
        return state.generator
    return GenerativeModel.mix([(1 - eps, state.generator), (eps, state.generator.corruption())])


def _check_formed(states: Sequence[LearningState], graph: Optional[UavGraph]) -> None:
    if graph is None:
        raise ProtocolError("Training requires a formed exchange graph")
    ids = sorted(s.uav_id for s in states)
    if ids != graph.node_ids:
        raise ProtocolError(f"Learner ids {ids} do not match graph nodes {graph.node_ids}")
    if graph.num_nodes > 1:
        idle = [i for i in ids if graph.in_degree(i) == 0 or graph.out_degree(i) == 0]
        if idle:
            raise ProtocolError(f"Graph is not formed: UAVs {idle} have no in- or out-edges")


def train_iteration(
    states: Sequence[LearningState], graph: UavGraph, params: LearningParams
) -> list[LearningState]:
    """
    One synchronous round for all UAVs.

    Emissions are computed from the pre-round states; then every UAV ingests its neighbour
    batches, refits the discriminator against its current generator and moves the generator to
    the ingested mixture.

    Args:
        states: Learner states, one per graph node
        graph: Formed exchange graph
        params: Learning parameters

    Returns:
        New learner states
    """
    _check_formed(states, graph)
    by_id = {s.uav_id: s for s in states}
    batches = {
        (j, i): emit_batch(by_id[j], params) for j in sorted(by_id) for i in graph.out_set(j)
    }

    updated = []
    for state in states:
        i = state.uav_id
        neighbors = graph.in_set(i) if params.share_ratio > 0 else []
        weights = mixture_weights(
            state.dataset_size, {j: by_id[j].dataset_size for j in neighbors}, params.share_ratio
        )
        base = state.owned if params.retain_received else state.local
        mixture = mixture_distribution(base, {j: batches[j, i] for j in neighbors}, weights)
        discriminator = Discriminator(mixture, state.generator, params.disc_error, params.log_floor)
        value = value_function(discriminator, state.generator, mixture, params.log_floor)
        updated.append(
            replace(
                state,
                owned=mixture if params.retain_received else state.owned,
                generator=mixture,
                mixture=mixture,
                discriminator=discriminator,
                iteration=state.iteration + 1,
                received={j: exchanged_count(by_id[j], params) for j in neighbors},
                value=value,
            )
        )
    return updated


@dataclass(frozen=True)
class EquilibriumTolerances:
    jsd: float = 0.05
    discriminator: float = 0.05
    value: float = 0.02


@dataclass(frozen=True)
class UavEquilibrium:
    uav_id: int
    generator_divergence: float
    discriminator_mean: float
    discriminator_max_deviation: float
    value: float
    jsd_to_global: float
    generator_optimal: bool
    discriminator_optimal: bool
    network_optimal: bool


@dataclass(frozen=True)
class EquilibriumReport:
    uavs: list[UavEquilibrium]

    @property
    def passed(self) -> bool:
        return all(
            u.generator_optimal and u.discriminator_optimal and u.network_optimal
            for u in self.uavs
        )


def equilibrium_check(
    states: Sequence[LearningState],
    global_model: GenerativeModel,
    tolerances: EquilibriumTolerances = EquilibriumTolerances(),
    floor: float = 1e-9,
) -> EquilibriumReport:
    """
    Verify generator optimality (f_G = f_b), discriminator optimality (D = 1/2 on support)
    and the network-wide equilibrium (f_G = f).

    Returns:
        Per-UAV report; it never raises on failed checks
    """
    report = []
    for state in states:
        generator_gap = model_divergence(state.generator, state.mixture, floor) / 2
        jsd = model_divergence(state.generator, global_model, floor) / 2
        d_mean = state.discriminator.mean()
        report.append(
            UavEquilibrium(
                uav_id=state.uav_id,
                generator_divergence=generator_gap,
                discriminator_mean=d_mean,
                discriminator_max_deviation=state.discriminator.max_deviation(),
                value=state.value,
                jsd_to_global=jsd,
                generator_optimal=generator_gap < tolerances.jsd,
                discriminator_optimal=abs(d_mean - 0.5) <= tolerances.discriminator,
                network_optimal=jsd < tolerances.jsd,
            )
        )
    return EquilibriumReport(report)


@dataclass
class TrainingResult:
    states: list[LearningState]
    history: list[dict]

    def generators(self) -> list[GenerativeModel]:
        return [s.generator for s in self.states]


def global_distribution(datasets: Sequence[Dataset], grid: BinGrid) -> GenerativeModel:
    """Empirical distribution F of all UAVs' data pooled."""
    return GenerativeModel.from_dataset(grid, pool_datasets(datasets))


def _round_rows(
    states: Sequence[LearningState],
    global_model: GenerativeModel,
    params: LearningParams,
) -> list[dict]:
    rows = []
    for state in states:
        rows.append(
            {
                "iteration": state.iteration,
                "uav_id": state.uav_id,
                "jsd_to_global": model_divergence(state.generator, global_model, params.log_floor)
                / 2,
                "discriminator_mean": state.discriminator.mean(),
                "value_function": state.value,
                "minibatch_value": minibatch_value(
                    state.discriminator,
                    state.generator,
                    state.mixture,
                    params.minibatch_size,
                    state.rng,
                    params.log_floor,
                ),
                "support_fraction": support_fraction(state.generator, global_model),
            }
        )
    return rows


def train_network(
    datasets: Sequence[Dataset],
    graph: UavGraph,
    grid: BinGrid,
    params: LearningParams,
    rounds: int,
    seed: int,
    mlflow_active: bool = False,
    show_progress: bool = True,
) -> TrainingResult:
    """
    Run the exchange protocol for a number of rounds.

    Args:
        datasets: Local datasets, one per UAV
        graph: Formed exchange graph
        grid: Bin grid
        params: Learning parameters
        rounds: Number of rounds (typically T_G)
        seed: Seed for the learners' sampling randomness
        mlflow_active: Log per-round metrics to the active MLflow run
        show_progress: Show a progress bar

    Returns:
        Final states and per-round metric rows
    """
    global_model = global_distribution(datasets, grid)
    states = init_states(datasets, grid, seed)
    _check_formed(states, graph)
    history = _round_rows(states, global_model, params)

    print(f"Training {len(states)} learners for {rounds} rounds ({params.exchange_mode} exchange)")
    for _ in tqdm(range(rounds), desc="Rounds", disable=not show_progress):
        states = train_iteration(states, graph, params)
        rows = _round_rows(states, global_model, params)
        history.extend(rows)
        log_mlflow_metrics(
            mlflow_active,
            {
                "jsd": float(np.mean([r["jsd_to_global"] for r in rows])),
                "total_utility": total_utility([r["value_function"] for r in rows]),
                "discriminator_mean": float(np.mean([r["discriminator_mean"] for r in rows])),
            },
            step=states[0].iteration,
        )

    final_jsd = np.mean([r["jsd_to_global"] for r in history[-len(states):]])
    print(f"Training completed! Mean JSD to global: {final_jsd:.4f}")
    return TrainingResult(states, history)
