from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from uav_channel_gan.completion import CompletionParams, completion_curve
from uav_channel_gan.exceptions import ContractViolation
from uav_channel_gan.spread import spread_simulator

RING4 = CompletionParams(share_ratio=0.5, disc_error=0.1, in_degree=1, l_max=3, l_loop_min=4)


def test_ring_matches_closed_form_before_loops(ring4):
    curve = spread_simulator(ring4, RING4, trials=100_000, seed=11, max_iterations=6)
    closed = completion_curve(RING4, 6)
    assert (curve.source, curve.target) == (0, 3)
    for T in range(3, 7):
        stderr = np.sqrt(closed[T] * (1 - closed[T]) / curve.trials)
        assert abs(curve.probabilities[T] - closed[T]) < 3 * stderr
    assert curve.probabilities[2] == 0.0


def test_lossless_full_share_arrives_at_l_max(ring4):
    params = replace(RING4, share_ratio=1.0, disc_error=0.0)
    curve = spread_simulator(ring4, params, trials=1000, seed=3, max_iterations=8)
    assert curve.arrival[2] == 0.0
    assert curve.arrival[3] == 1.0


def test_independent_of_worker_count(ring4):
    kwargs = dict(trials=25_000, seed=5, max_iterations=10, chunk_size=10_000)
    serial = spread_simulator(ring4, RING4, n_jobs=1, **kwargs)
    parallel = spread_simulator(ring4, RING4, n_jobs=2, **kwargs)
    np.testing.assert_array_equal(serial.probabilities, parallel.probabilities)
    np.testing.assert_array_equal(serial.arrival, parallel.arrival)


def test_same_seed_same_curve():
    g = nx.complete_graph(4, create_using=nx.DiGraph)
    params = replace(RING4, in_degree=3, l_max=1, l_loop_min=2)
    first = spread_simulator(g, params, trials=5000, seed=9)
    second = spread_simulator(g, params, trials=5000, seed=9)
    np.testing.assert_array_equal(first.probabilities, second.probabilities)
    assert np.all(np.diff(first.probabilities) >= 0)


def test_rejects_empty_run(ring4):
    with pytest.raises(ContractViolation):
        spread_simulator(ring4, RING4, trials=0, seed=1)
