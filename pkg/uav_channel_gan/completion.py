"""Learning-completion probability, required iterations, completion time and communication load."""

from dataclasses import dataclass, field, replace

import numpy as np

from uav_channel_gan.exceptions import CompletionNotAttainedError, ContractViolation, RegimeError
from uav_channel_gan.topology import (
    ConstraintParams,
    UavGraph,
    completion_loop_length,
    witness_pairs,
)

GAMMA_KINDS = ("loop_linear", "geometric", "constant")


@dataclass(frozen=True)
class GammaSchedule:
    """
    Acceleration coefficient gamma(T) once looped information flow begins.

    gamma(T) = 1 for T <= T0 = l_max + l_loop_min - 1. Beyond T0, with m = T - T0:
        loop_linear: 1 + rate * (N eta)^2 * m
        geometric:   1 + N eta * (1 - decay^m)
        constant:    1
    """

    kind: str = "loop_linear"
    rate: float = 0.75
    decay: float = 0.5

    def __post_init__(self):
        if self.kind not in GAMMA_KINDS:
            raise ContractViolation(f"Unknown gamma schedule '{self.kind}', expected {GAMMA_KINDS}")
        if self.rate < 0:
            raise ContractViolation(f"gamma rate must be >= 0, got {self.rate}")
        if not 0 < self.decay < 1:
            raise ContractViolation(f"gamma decay must be in (0, 1), got {self.decay}")

    def gamma(self, T: int, t0: int, n_eta: float) -> float:
        m = T - t0
        if m <= 0 or self.kind == "constant":
            return 1.0
        if self.kind == "loop_linear":
            return 1.0 + self.rate * n_eta**2 * m
        return 1.0 + n_eta * (1.0 - self.decay**m)


@dataclass(frozen=True)
class CompletionParams:
    """
    Inputs of the closed-form completion analysis.

    The closed limits share_ratio = 0, disc_error = 1 and in_degree = 0 are accepted.
    """

    share_ratio: float
    disc_error: float
    in_degree: int
    l_max: int
    l_loop_min: int
    confidence: float = 0.99
    tx_time: float = 0.01
    train_time: float = 0.09
    sample_scalars: float = 11
    dataset_size: int = 1000
    rb_budget: int = 4
    bits_per_scalar: int = 32
    gamma_schedule: GammaSchedule = field(default_factory=GammaSchedule)

    def __post_init__(self):
        errors = []
        if not 0 <= self.share_ratio <= 1:
            errors.append(f"share_ratio must be in [0, 1], got {self.share_ratio}")
        if not 0 <= self.disc_error <= 1:
            errors.append(f"disc_error must be in [0, 1], got {self.disc_error}")
        if self.in_degree < 0:
            errors.append(f"in_degree must be >= 0, got {self.in_degree}")
        if self.l_max < 1:
            errors.append(f"l_max must be >= 1, got {self.l_max}")
        if self.l_loop_min < 2:
            errors.append(f"l_loop_min must be >= 2, got {self.l_loop_min}")
        if not 0 < self.confidence < 1:
            errors.append(f"confidence must be in (0, 1), got {self.confidence}")
        if self.tx_time < 0 or self.train_time < 0:
            errors.append("tx_time and train_time must be non-negative")
        if self.sample_scalars < 0 or self.dataset_size < 0 or self.rb_budget < 0:
            errors.append("sample_scalars, dataset_size and rb_budget must be non-negative")
        if errors:
            raise ContractViolation("; ".join(errors))

    @property
    def hop_success(self) -> float:
        return (1.0 - self.disc_error) * self.share_ratio

    @property
    def dilution(self) -> float:
        """1 + N eta: per-iteration dilution of owned information."""
        return 1.0 + self.in_degree * self.share_ratio

    @property
    def loop_start(self) -> int:
        """T0 = l_max + l_loop_min - 1, the last iteration with gamma pinned to 1."""
        return self.l_max + self.l_loop_min - 1

    def gamma(self, T: int) -> float:
        return self.gamma_schedule.gamma(T, self.loop_start, self.in_degree * self.share_ratio)

    def to_dict(self) -> dict:
        return {
            "share_ratio": self.share_ratio,
            "disc_error": self.disc_error,
            "in_degree": self.in_degree,
            "l_max": self.l_max,
            "l_loop_min": self.l_loop_min,
            "confidence": self.confidence,
            "tx_time": self.tx_time,
            "train_time": self.train_time,
            "sample_scalars": self.sample_scalars,
            "dataset_size": self.dataset_size,
            "rb_budget": self.rb_budget,
            "gamma_kind": self.gamma_schedule.kind,
            "gamma_rate": self.gamma_schedule.rate,
            "gamma_decay": self.gamma_schedule.decay,
        }


@dataclass(frozen=True)
class CompletionCurve:
    """p_G(T) for T = 0..max_T; `clamped` marks a per-iteration term clamped to 1."""

    params: CompletionParams
    probabilities: np.ndarray
    clamped: bool

    @property
    def max_iterations(self) -> int:
        return len(self.probabilities) - 1

    def __getitem__(self, T: int) -> float:
        return float(self.probabilities[T])


def _log_arrival(T: int, params: CompletionParams, log_gamma: float) -> float:
    if T < params.l_max or params.hop_success == 0.0:
        return -np.inf
    return float(
        params.l_max * np.log(params.hop_success)
        - (T - 1) * np.log(params.dilution)
        + log_gamma
    )


def arrival_probability(T: int, params: CompletionParams, log_gamma: float = 0.0) -> float:
    """
    Probability that the tagged information arrives at iteration T, clamped to 1.

    Args:
        T: Iteration
        params: Completion parameters
        log_gamma: Sum of ln gamma(t) over T0 < t <= T

    Returns:
        min(1, [(1 - eps) eta]^l_max / (1 + N eta)^(T - 1) times the gamma product)
    """
    return float(np.exp(min(_log_arrival(T, params, log_gamma), 0.0)))


def completion_curve(params: CompletionParams, max_iterations: int) -> CompletionCurve:
    """
    Completion probability for every T up to max_iterations.

    Args:
        params: Completion parameters
        max_iterations: Last iteration to evaluate

    Returns:
        Completion curve with the clamp diagnostic
    """
    if max_iterations < 0:
        raise ContractViolation(f"T must be >= 0, got {max_iterations}")
    probabilities = np.zeros(max_iterations + 1)
    survival, log_gamma, clamped = 1.0, 0.0, False
    for T in range(1, max_iterations + 1):
        if T > params.loop_start:
            log_gamma += np.log(params.gamma(T))
        clamped = clamped or _log_arrival(T, params, log_gamma) > 0.0
        survival *= 1.0 - arrival_probability(T, params, log_gamma)
        probabilities[T] = 1.0 - survival
    return CompletionCurve(params, np.clip(probabilities, 0.0, 1.0), clamped)


def completion_probability(T: int, params: CompletionParams) -> float:
    """p_G(T): probability that every generator has absorbed the network-wide distribution."""
    if T < 0:
        raise ContractViolation(f"T must be >= 0, got {T}")
    return completion_curve(params, T)[T]


def recursion_oracle(T: int, params: CompletionParams) -> float:
    """
    Completion probability from the hop-by-hop recursion, valid while gamma is pinned to 1.

    Args:
        T: Iteration, T < l_max + l_loop_min
        params: Completion parameters

    Returns:
        Probability computed without the closed form
    """
    if T < 0 or T >= params.l_max + params.l_loop_min:
        raise RegimeError(
            f"Oracle valid for 0 <= T < {params.l_max + params.l_loop_min}, got T = {T}"
        )
    p_in = params.hop_success
    for _ in range(params.l_max - 1):
        p_out = p_in / params.dilution
        p_in = params.hop_success * p_out

    completed = 0.0
    for t in range(params.l_max, T + 1):
        completed = completed + (1.0 - completed) * p_in
        p_in = p_in / params.dilution
    return completed


def required_iterations(params: CompletionParams, max_iterations: int = 1000) -> int:
    """
    T_G: smallest T with p_G(T - 1) < p_tau <= p_G(T).

    Args:
        params: Completion parameters
        max_iterations: Search cap

    Returns:
        Required number of iterations
    """
    curve = completion_curve(params, max_iterations)
    reached = np.nonzero(curve.probabilities >= params.confidence)[0]
    if len(reached) == 0:
        raise CompletionNotAttainedError(max_iterations, curve[max_iterations], params.confidence)
    return int(reached[0])


def completion_time(params: CompletionParams, iterations: int) -> float:
    """C(G) = (t_tau + t_eps) * T_G in seconds."""
    if iterations < 1:
        raise ContractViolation(f"T_G must be >= 1, got {iterations}")
    return (params.tx_time + params.train_time) * iterations


@dataclass(frozen=True)
class CommLoad:
    scalars: float
    bits: float


def comm_load(params: CompletionParams, iterations: int) -> CommLoad:
    """Total exchanged traffic T_G * eta * S * rho * B, in sample scalars and bits."""
    if iterations < 1:
        raise ContractViolation(f"T_G must be >= 1, got {iterations}")
    scalars = (
        iterations
        * params.share_ratio
        * params.dataset_size
        * params.sample_scalars
        * params.rb_budget
    )
    return CommLoad(scalars, scalars * params.bits_per_scalar)


@dataclass(frozen=True)
class LoadComparison:
    """Per-iteration and total loads in bits for the proposed scheme and the baselines."""

    iterations: int
    proposed_per_iteration: float
    md_per_iteration: float
    fl_per_iteration: float
    proposed: float
    md: float
    fl: float
    centralized: float | None = None

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "proposed_per_iteration_bits": self.proposed_per_iteration,
            "md_per_iteration_bits": self.md_per_iteration,
            "fl_per_iteration_bits": self.fl_per_iteration,
            "proposed_bits": self.proposed,
            "md_bits": self.md,
            "fl_bits": self.fl,
            "centralized_bits": self.centralized,
        }


def centralized_load(num_uavs: int, dataset_size: int, sample_bits: float) -> float:
    """One-shot raw sharing: every UAV sends its whole dataset to every other UAV."""
    return float(num_uavs * (num_uavs - 1) * dataset_size * sample_bits)


def baseline_loads(
    params: CompletionParams,
    model_param_count: int,
    iterations: int,
    bits_per_parameter: int = 32,
    num_uavs: int | None = None,
) -> LoadComparison:
    """
    Communication loads of the proposed exchange against MD- and FL-style baselines.

    The MD baseline exchanges samples in both directions, doubling the proposed traffic; the
    FL baseline ships model_param_count parameters over each of the B links per iteration.

    Args:
        params: Completion parameters
        model_param_count: Parameters of the shared model
        iterations: T_G
        bits_per_parameter: Bits per model parameter
        num_uavs: Network size for the centralized raw-sharing load (omitted when None)

    Returns:
        Load comparison in bits
    """
    if model_param_count < 1:
        raise ContractViolation(f"model_param_count must be >= 1, got {model_param_count}")
    proposed_iter = comm_load(params, 1).bits
    fl_iter = float(params.rb_budget * model_param_count * bits_per_parameter)
    centralized = None
    if num_uavs is not None:
        centralized = centralized_load(
            num_uavs, params.dataset_size, params.sample_scalars * params.bits_per_scalar
        )
    return LoadComparison(
        iterations=iterations,
        proposed_per_iteration=proposed_iter,
        md_per_iteration=2.0 * proposed_iter,
        fl_per_iteration=fl_iter,
        proposed=comm_load(params, iterations).bits,
        md=2.0 * comm_load(params, iterations).bits,
        fl=fl_iter * iterations,
        centralized=centralized,
    )


def completion_params_from_graph(
    graph: UavGraph,
    constraints: ConstraintParams,
    disc_error: float,
    confidence: float = 0.99,
    train_time: float = 0.09,
    gamma_schedule: GammaSchedule | None = None,
) -> CompletionParams:
    """
    Completion parameters of a formed graph.

    N is the mean in-degree rounded to an integer; l_loop_min is minimized over all witness
    pairs of l_max; S is the largest dataset in the network.
    """
    l_max, _ = witness_pairs(graph)
    params = CompletionParams(
        share_ratio=constraints.share_ratio,
        disc_error=disc_error,
        in_degree=max(1, round(graph.num_edges / graph.num_nodes)),
        l_max=l_max,
        l_loop_min=completion_loop_length(graph),
        confidence=confidence,
        tx_time=constraints.tx_time_limit,
        train_time=train_time,
        sample_scalars=constraints.sample_scalars,
        dataset_size=max(n.dataset_size for n in graph.nodes),
        rb_budget=constraints.rb_budget,
        bits_per_scalar=constraints.bits_per_scalar,
    )
    if gamma_schedule is not None:
        params = replace(params, gamma_schedule=gamma_schedule)
    return params
