"""Experiment runners: parameter sweeps, learner comparison and downlink-rate evaluation."""

import multiprocessing
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from uav_channel_gan.completion import (
    CompletionParams,
    LoadComparison,
    baseline_loads,
    comm_load,
    completion_curve,
    completion_params_from_graph,
    completion_time,
    required_iterations,
)
from uav_channel_gan.config import ExperimentConfig
from uav_channel_gan.data_loader import create_datasets
from uav_channel_gan.dataset import Dataset
from uav_channel_gan.exceptions import CompletionNotAttainedError, InfeasibleError
from uav_channel_gan.inference import RateResult, eval_downlink_rate
from uav_channel_gan.metrics import jsd_metric
from uav_channel_gan.model import GenerativeModel
from uav_channel_gan.spread import spread_simulator
from uav_channel_gan.topology import UavGraph, network_formation
from uav_channel_gan.train import TrainingResult, global_distribution, init_states, train_network


@dataclass
class NetworkSetup:
    """Formed network and its completion analysis for one configuration."""

    graph: UavGraph
    params: CompletionParams
    iterations: int


def form_network(config: ExperimentConfig) -> NetworkSetup:
    """
    Form the exchange graph and compute T_G.

    Raises:
        InfeasibleError: If no topology satisfies the constraints
        CompletionNotAttainedError: If the confidence is not reached within the cap
    """
    graph = network_formation(config.nodes(), config.constraints())
    params = completion_params_from_graph(
        graph,
        config.constraints(),
        disc_error=config.completion.disc_error,
        confidence=config.completion.confidence,
        train_time=config.completion.train_time,
        gamma_schedule=config.completion.gamma,
    )
    iterations = required_iterations(params, config.completion.max_iterations)
    return NetworkSetup(graph, params, iterations)


@dataclass
class SweepPoint:
    axis: str
    value: float
    feasible: bool
    seed: int
    replications: int
    iterations: Optional[int] = None
    completion_time_s: Optional[float] = None
    comm_load_scalars: Optional[float] = None
    comm_load_bits: Optional[float] = None
    num_edges: Optional[int] = None
    l_max: Optional[int] = None
    l_loop_min: Optional[int] = None
    p_closed_form: Optional[float] = None
    p_monte_carlo: Optional[float] = None
    p_monte_carlo_std: Optional[float] = None
    jsd: Optional[float] = None
    mean_rate_bps: Optional[float] = None
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepResult:
    axis: str
    points: list[SweepPoint] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [p.value for p in self.points]

    @property
    def iterations(self) -> list[Optional[int]]:
        return [p.iterations for p in self.points]

    def feasible_points(self) -> list[SweepPoint]:
        return [p for p in self.points if p.feasible]

    def to_rows(self) -> list[dict]:
        return [p.to_dict() for p in self.points]


def _learning_jsd(
    config: ExperimentConfig, setup: NetworkSetup, seed: int
) -> tuple[float, TrainingResult, list[Dataset]]:
    env = config.environment()
    datasets = create_datasets(
        env, config.codebook(), config.scenario.dataset_size, seed, show_progress=False
    )
    grid = config.grid()
    rounds = config.learning.rounds if config.learning.rounds is not None else setup.iterations
    result = train_network(
        datasets, setup.graph, grid, config.learning_params(), rounds, seed, show_progress=False
    )
    jsd = jsd_metric(result.generators(), global_distribution(datasets, grid))
    return jsd, result, datasets


def run_point(
    config: ExperimentConfig,
    axis: str,
    value: float,
    seed: int,
    with_spread: bool = True,
    with_learning: bool = False,
) -> SweepPoint:
    """
    Evaluate one sweep point: formation, closed form, Monte Carlo and optionally learning.

    Infeasible points are returned flagged instead of raising.
    """
    replications = config.experiment.replications
    point = SweepPoint(axis, value, feasible=False, seed=seed, replications=replications)
    try:
        point_config = config.with_axis(axis, value)
        setup = form_network(point_config)
    except (InfeasibleError, CompletionNotAttainedError) as e:
        point.message = str(e)
        print(f"Warning: sweep point {axis}={value} is infeasible: {e}")
        return point

    T_G = setup.iterations
    load = comm_load(setup.params, T_G)
    point.feasible = True
    point.iterations = T_G
    point.completion_time_s = completion_time(setup.params, T_G)
    point.comm_load_scalars = load.scalars
    point.comm_load_bits = load.bits
    point.num_edges = setup.graph.num_edges
    point.l_max = setup.params.l_max
    point.l_loop_min = setup.params.l_loop_min
    point.p_closed_form = completion_curve(setup.params, T_G)[T_G]

    children = np.random.SeedSequence(seed).spawn(replications)
    if with_spread:
        estimates = [
            spread_simulator(
                setup.graph,
                setup.params,
                config.experiment.spread_trials,
                int(child.generate_state(1)[0]),
                max_iterations=max(config.experiment.spread_max_iterations, T_G),
            ).probabilities[T_G]
            for child in children
        ]
        point.p_monte_carlo = float(np.mean(estimates))
        point.p_monte_carlo_std = float(np.std(estimates))
    if with_learning:
        jsd_values, rates = [], []
        for child in children:
            child_seed = int(child.generate_state(1)[0])
            jsd, result, _ = _learning_jsd(point_config, setup, child_seed)
            jsd_values.append(jsd)
            rates.append(
                eval_downlink_rate(
                    point_config.environment(),
                    point_config.codebook(),
                    point_config.evaluation_params(),
                    result.generators(),
                    child_seed,
                    label="distributed",
                ).mean_bps
            )
        point.jsd = float(np.mean(jsd_values))
        point.mean_rate_bps = float(np.mean(rates))
    return point


def _sweep_worker(job: tuple) -> SweepPoint:
    return run_point(*job)


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    values: Optional[Sequence[float]] = None,
    with_spread: bool = True,
    with_learning: bool = False,
    n_jobs: Optional[int] = None,
    show_progress: bool = True,
) -> SweepResult:
    """
    Sweep one axis (B, I, eta or epsilon) over its configured grid.

    Args:
        config: Base configuration
        axis: Sweep axis
        values: Axis values (defaults to the configured grid)
        with_spread: Run the Monte-Carlo spread simulator at every point
        with_learning: Train the distributed learners and evaluate the downlink rate
        n_jobs: Worker processes (defaults to experiment.n_jobs)
        show_progress: Show a progress bar over points

    Returns:
        Points ordered by axis value
    """
    values = sorted(values) if values is not None else config.sweep_values(axis)
    n_jobs = n_jobs or config.experiment.n_jobs
    children = np.random.SeedSequence(config.experiment.seed).spawn(len(values))
    jobs = [
        (config, axis, value, int(child.generate_state(1)[0]), with_spread, with_learning)
        for value, child in zip(values, children)
    ]
    print(f"Sweeping {axis} over {values}")
    if n_jobs > 1 and len(jobs) > 1:
        with multiprocessing.Pool(n_jobs) as pool:
            points = pool.map(_sweep_worker, jobs)
    else:
        points = [_sweep_worker(job) for job in tqdm(jobs, desc="Sweep", disable=not show_progress)]

    result = SweepResult(axis, sorted(points, key=lambda p: p.value))
    for p in result.points:
        status = f"T_G = {p.iterations}" if p.feasible else "infeasible"
        print(f"  {axis} = {p.value}: {status}")
    return result


@dataclass
class ComparisonResult:
    """JSD of each learner per network size, plus the analytic load comparison."""

    rows: list[dict]
    loads: LoadComparison

    def jsd(self, num_uavs: int, method: str) -> float:
        for row in self.rows:
            if row["num_uavs"] == num_uavs and row["method"] == method:
                return row["jsd"]
        raise KeyError((num_uavs, method))


def standalone_models(datasets: Sequence[Dataset], config: ExperimentConfig) -> list:
    """Local-only learners: each generator stays at its own empirical distribution."""
    return [s.generator for s in init_states(datasets, config.grid(), config.experiment.seed)]


def centralized_models(datasets: Sequence[Dataset], config: ExperimentConfig) -> list:
    """Raw-data pooling: every UAV learns the pooled distribution."""
    pooled = global_distribution(datasets, config.grid())
    return [pooled] * len(datasets)


def run_learning_comparison(
    config: ExperimentConfig, sizes: Optional[Sequence[int]] = None
) -> ComparisonResult:
    """
    Compare stand-alone, distributed and centralized learners on each network size.

    Args:
        config: Base configuration
        sizes: Network sizes I (defaults to experiment.comparison_sizes)

    Returns:
        Comparison rows and the load comparison at the base configuration
    """
    sizes = sorted(sizes or config.experiment.comparison_sizes)
    seed = config.experiment.seed
    show = config.logging.show_progress
    rows = []
    for size in sizes:
        sized = config.with_axis("I", size)
        setup = form_network(sized)
        datasets = create_datasets(
            sized.environment(), sized.codebook(), sized.scenario.dataset_size, seed, show
        )
        grid = sized.grid()
        global_model = global_distribution(datasets, grid)
        rounds = sized.learning.rounds if sized.learning.rounds is not None else setup.iterations
        trained = train_network(
            datasets, setup.graph, grid, sized.learning_params(), rounds, seed, show_progress=show
        )
        learners = {
            "standalone": standalone_models(datasets, sized),
            "distributed": trained.generators(),
            "centralized": centralized_models(datasets, sized),
        }
        for method, models in learners.items():
            rows.append(
                {
                    "num_uavs": size,
                    "method": method,
                    "rounds": rounds,
                    "jsd": jsd_metric(models, global_model, sized.learning.log_floor),
                }
            )
            print(f"I = {size}, {method}: JSD {rows[-1]['jsd']:.4f}")

    base = form_network(config)
    loads = baseline_loads(
        base.params,
        config.experiment.model_param_count,
        base.iterations,
        num_uavs=config.scenario.num_uavs,
    )
    return ComparisonResult(rows, loads)


def run_rate_evaluation(config: ExperimentConfig) -> list[RateResult]:
    """
    Mean downlink rate of perfect CSI, distributed and stand-alone MAP beam selection.

    All methods share one draw sequence.
    """
    seed = config.experiment.seed
    show = config.logging.show_progress
    setup = form_network(config)
    env, codebook = config.environment(), config.codebook()
    datasets = create_datasets(env, codebook, config.scenario.dataset_size, seed, show)
    rounds = config.learning.rounds if config.learning.rounds is not None else setup.iterations
    trained = train_network(
        datasets,
        setup.graph,
        config.grid(),
        config.learning_params(),
        rounds,
        seed,
        show_progress=show,
    )

    methods: dict[str, Optional[list[GenerativeModel]]] = {
        "perfect_csi": None,
        "distributed": trained.generators(),
        "standalone": standalone_models(datasets, config),
    }
    params = config.evaluation_params()
    return [
        eval_downlink_rate(env, codebook, params, models, seed, label=label, show_progress=show)
        for label, models in methods.items()
    ]
