"""Monte-Carlo simulation of tagged-information spread over the exchange graph."""

import multiprocessing
from dataclasses import dataclass

import networkx as nx
import numpy as np
from tqdm import tqdm

from uav_channel_gan.completion import CompletionParams
from uav_channel_gan.exceptions import ContractViolation
from uav_channel_gan.topology import UavGraph, as_digraph, witness_pairs


@dataclass(frozen=True)
class SpreadCurve:
    """Empirical completion curve for T = 0..max_T."""

    probabilities: np.ndarray
    stderr: np.ndarray
    arrival: np.ndarray
    trials: int
    seed: int
    source: int
    target: int

    @property
    def max_iterations(self) -> int:
        return len(self.probabilities) - 1


def _spread_chunk(args: dict) -> tuple[np.ndarray, np.ndarray]:
    """
    Module-level worker (must be picklable for the process pool).

    Returns histograms of the first completion iteration and of the first hop-chain arrival;
    the last bin counts trials that never got there.
    """
    rng = np.random.default_rng(args["seed"])
    n, l_max, max_T = args["trials"], args["l_max"], args["max_iterations"]
    hop, relay_keep, source_keep = args["hop"], args["relay_keep"], args["source_keep"]

    first_done = np.full(n, max_T + 1)
    first_arrival = np.full(n, max_T + 1)
    for T in range(l_max, max_T + 1):
        hops_ok = rng.binomial(l_max, hop, size=n) == l_max
        relays_ok = np.all(rng.random((n, len(relay_keep))) < relay_keep, axis=1)
        waited_ok = rng.binomial(T - l_max, 1.0 - source_keep, size=n) == 0
        done = hops_ok & relays_ok & waited_ok
        first_done = np.where(done & (first_done > max_T), T, first_done)
        first_arrival = np.where(hops_ok & (first_arrival > max_T), T, first_arrival)

    return (
        np.bincount(first_done, minlength=max_T + 2),
        np.bincount(first_arrival, minlength=max_T + 2),
    )


def spread_simulator(
    graph: UavGraph | nx.DiGraph,
    params: CompletionParams,
    trials: int,
    seed: int,
    max_iterations: int = 30,
    chunk_size: int = 10_000,
    n_jobs: int = 1,
    show_progress: bool = False,
) -> SpreadCurve:
    """
    Estimate the completion probability by simulating the tagged-information model.

    Every iteration T >= l_max is an independent attempt: l_max hops each succeed with
    probability (1 - eps) eta, the information survives dilution 1 / (1 + N_v eta) at every
    relay v of a shortest witness path, and T - l_max waiting dilutions at the source.

    Args:
        graph: Strongly connected exchange graph
        params: Completion parameters (eta and eps are used; degrees come from the graph)
        trials: Number of Monte-Carlo trials
        seed: Master seed; chunk seeds are spawned from it
        max_iterations: Last iteration T to simulate
        chunk_size: Trials per chunk
        n_jobs: Worker processes (1 runs in-process)
        show_progress: Show a progress bar over chunks

    Returns:
        Spread curve with standard errors; identical for any n_jobs
    """
    if trials < 1:
        raise ContractViolation(f"trials must be >= 1, got {trials}")
    g = as_digraph(graph)
    l_max, pairs = witness_pairs(g)
    if not pairs:
        raise ContractViolation("Spread simulation needs at least two UAVs")
    source, target = pairs[0]
    path = nx.shortest_path(g, source, target)
    eta = params.share_ratio
    relay_keep = np.array([1.0 / (1.0 + g.in_degree(v) * eta) for v in path[1:-1]])

    sizes = [chunk_size] * (trials // chunk_size)
    if trials % chunk_size:
        sizes.append(trials % chunk_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [
        {
            "seed": child,
            "trials": size,
            "l_max": l_max,
            "max_iterations": max_iterations,
            "hop": params.hop_success,
            "relay_keep": relay_keep,
            "source_keep": 1.0 / (1.0 + g.in_degree(source) * eta),
        }
        for child, size in zip(children, sizes)
    ]

    if n_jobs > 1 and len(jobs) > 1:
        with multiprocessing.Pool(n_jobs) as pool:
            results = pool.map(_spread_chunk, jobs)
    else:
        jobs = tqdm(jobs, desc="Spread", disable=not show_progress)
        results = [_spread_chunk(job) for job in jobs]

    done_hist = np.sum([r[0] for r in results], axis=0)
    arrival_hist = np.sum([r[1] for r in results], axis=0)
    probabilities = np.cumsum(done_hist[: max_iterations + 1]) / trials
    arrival = np.cumsum(arrival_hist[: max_iterations + 1]) / trials
    stderr = np.sqrt(probabilities * (1.0 - probabilities) / trials)
    return SpreadCurve(probabilities, stderr, arrival, trials, seed, source, target)
