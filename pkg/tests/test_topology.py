import itertools
import math

import networkx as nx
import numpy as np
import pytest
from conftest import line_nodes

from uav_channel_gan.exceptions import (
    ConfigError,
    FormationError,
    GraphConnectivityError,
    InfeasibleError,
    RingNotFoundError,
)
from uav_channel_gan.topology import (
    ConstraintParams,
    FormationAgent,
    FormationBoard,
    LinkBudget,
    UavGraph,
    UavNode,
    a2a_rate,
    audit_constraints,
    build_ring,
    check_necessary_condition,
    completion_loop_length,
    extended_feasible_set,
    feasible_set,
    link_budget,
    max_shortest_path,
    min_loop_length,
    network_formation,
    node_max_shortest_path,
    split_rb_budget,
    witness_pairs,
)
from uav_channel_gan.utils import dbm_to_watts


def test_a2a_rate_examples():
    assert a2a_rate(1.0, 1.0, 1.0, 2e6) == pytest.approx(2e6)
    assert a2a_rate(10.0, 1.0, 1.0, 2e6) == pytest.approx(6.918e6, rel=1e-3)
    assert a2a_rate(0.0, 1.0, 1.0, 2e6) == 0.0


def test_link_budget_meets_time_and_snr(constraints):
    src, dst = line_nodes(2)
    budget = link_budget(src, dst, constraints)
    bits = constraints.share_ratio * src.dataset_size * constraints.sample_bits
    assert budget.snr >= constraints.snr_threshold * (1 - 1e-9)
    assert bits / budget.rate_bps == pytest.approx(constraints.tx_time_limit)


def test_feasible_set_excludes_self(constraints):
    nodes = line_nodes(3)
    assert feasible_set(0, nodes, constraints) == frozenset({1, 2})


def test_feasible_set_empty_when_far_apart(constraints):
    nodes = line_nodes(3, spacing=1e6)
    assert feasible_set(1, nodes, constraints) == frozenset()
    report = check_necessary_condition(nodes, constraints)
    assert not report
    assert report.empty == (0, 1, 2)
    assert "empty feasible sets" in report.diagnostic


def test_extended_feasible_set_respects_power(constraints):
    nodes = line_nodes(4, out_budget=2)
    family = extended_feasible_set(0, nodes, constraints)
    assert family == [frozenset(s) for s in [(1, 2), (1, 3), (2, 3)]]
    power = {j: link_budget(nodes[0], nodes[j], constraints).tx_power_w for j in (1, 2, 3)}
    tight = [
        UavNode(n.id, n.position, n.dataset_size, power[1] + power[2] * 1.01, n.out_budget)
        if n.id == 0
        else n
        for n in nodes
    ]
    assert extended_feasible_set(0, tight, constraints) == [frozenset({1, 2})]


def test_ring_paths(ring4):
    assert ring4.edges == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert max_shortest_path(ring4) == (3, (0, 3))
    assert witness_pairs(ring4) == (3, [(0, 3), (1, 0), (2, 1), (3, 2)])
    assert node_max_shortest_path(ring4, 2) == 3
    assert min_loop_length(ring4, 1) == 4
    assert completion_loop_length(ring4) == 4


def test_complete_digraph_paths():
    g = nx.complete_graph(4, create_using=nx.DiGraph)
    assert max_shortest_path(g)[0] == 1
    assert completion_loop_length(g) == 2


def test_disconnected_graph_raises():
    g = nx.DiGraph([(0, 1)])
    with pytest.raises(GraphConnectivityError):
        witness_pairs(g)
    assert node_max_shortest_path(g, 1) == float("inf")


def test_formation_gives_ring_when_budget_equals_size(ring4, constraints):
    assert ring4.is_strongly_connected()
    assert all(ring4.in_degree(i) == 1 and ring4.out_degree(i) == 1 for i in ring4.node_ids)
    assert audit_constraints(ring4, constraints) == []


def test_formation_uses_every_block(constraints):
    params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=8)
    graph = network_formation(line_nodes(4, out_budget=2), params)
    assert graph.num_edges == 8
    assert graph.is_strongly_connected()
    assert all(graph.out_degree(i) == 2 for i in graph.node_ids)
    assert max_shortest_path(graph)[0] <= 3
    assert audit_constraints(graph, params) == []


def test_formation_reaches_joint_optimum_on_five_uavs():
    params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=10)
    nodes = line_nodes(5, out_budget=2)
    graph = network_formation(nodes, params)
    assert _has_spanning_ring({i: graph.out_set(i) for i in graph.node_ids})
    assert max_shortest_path(graph)[0] == _best_ring_topology_l_max(nodes, params) == 2


def test_greedy_formation_keeps_ring_on_six_uavs():
    params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=12)
    graph = network_formation(line_nodes(6, out_budget=2), params, exhaustive_max_uavs=0)
    assert graph.num_edges == 12
    assert _has_spanning_ring({i: graph.out_set(i) for i in graph.node_ids})
    assert audit_constraints(graph, params) == []


def test_choose_removal_keeps_sole_cover(constraints):
    nodes = line_nodes(4, out_budget=2)
    agent = FormationAgent(
        node=nodes[0],
        budgets={j: link_budget(nodes[0], nodes[j], constraints) for j in (1, 2, 3)},
        ring_successor=1,
    )
    board = FormationBoard({0: {1, 2, 3}, 1: {2}, 2: {0}, 3: {0}})
    assert agent.surplus(board) == 1
    assert agent.choose_removal(board) == 2


def test_choose_out_set_without_ring(constraints):
    nodes = line_nodes(3)
    agent = FormationAgent(
        node=nodes[0], budgets={1: link_budget(nodes[0], nodes[1], constraints)}, ring_successor=1
    )
    families = {0: [frozenset({1})], 1: [frozenset({0})], 2: [frozenset({0})]}
    board = FormationBoard({i: set().union(*f) for i, f in families.items()}, families)
    with pytest.raises(FormationError, match="ring"):
        agent.choose_out_set(board)


@pytest.mark.parametrize(
    "method, exhaustive_max_uavs, count",
    [("choose_out_set", 5, 5), ("choose_removal", 0, 6)],
)
def test_formation_agents_see_only_own_budgets(monkeypatch, method, exhaustive_max_uavs, count):
    calls = []
    original = getattr(FormationAgent, method)

    def audited(self, board):
        assert all(b.src == self.node.id for b in self.budgets.values())
        assert set(self.budgets) == set(feasible_set(self.node.id, nodes, params))
        assert set(board.candidates[self.node.id]) <= set(self.budgets)
        calls.append(self.node.id)
        return original(self, board)

    monkeypatch.setattr(FormationAgent, method, audited)
    params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=2 * count)
    nodes = line_nodes(count, out_budget=2)
    graph = network_formation(nodes, params, exhaustive_max_uavs=exhaustive_max_uavs)
    assert set(calls) == set(range(count))
    assert all(graph.out_degree(i) == 2 for i in graph.node_ids)


def test_formation_complete_digraph():
    params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=12)
    graph = network_formation(line_nodes(4, out_budget=3), params)
    assert graph.num_edges == 12
    assert max_shortest_path(graph)[0] == 1


def test_formation_rejects_budget_overrun(constraints):
    with pytest.raises(FormationError):
        network_formation(line_nodes(4, out_budget=2), constraints)


def test_formation_infeasible_when_far_apart(constraints):
    with pytest.raises(InfeasibleError):
        network_formation(line_nodes(4, spacing=1e6), constraints)


def test_build_ring_checks_coverage(constraints):
    nodes = line_nodes(3)
    with pytest.raises(RingNotFoundError, match="no one can reach"):
        build_ring(nodes, {0: {1}, 1: {0}, 2: {0}}, constraints)


def test_build_ring_without_hamiltonian_cycle(constraints):
    nodes = line_nodes(3)
    with pytest.raises(RingNotFoundError):
        build_ring(nodes, {0: {1}, 1: {0, 2}, 2: {1}}, constraints)


def test_build_ring_follows_feasible_sets(constraints):
    nodes = line_nodes(3)
    ring = build_ring(nodes, {0: {2}, 1: {0}, 2: {1}}, constraints)
    assert ring.edges == [(0, 2), (1, 0), (2, 1)]


@pytest.mark.parametrize("num_nodes", [3, 4, 5])
def test_minimal_strongly_connected_digraphs_are_rings(num_nodes):
    all_edges = list(itertools.permutations(range(num_nodes), 2))
    found = 0
    for edges in itertools.combinations(all_edges, num_nodes):
        g = nx.DiGraph()
        g.add_nodes_from(range(num_nodes))
        g.add_edges_from(edges)
        if nx.is_strongly_connected(g):
            found += 1
            assert all(g.in_degree(i) == 1 and g.out_degree(i) == 1 for i in g)
    assert found == math.factorial(num_nodes - 1)


def test_minimal_strongly_connected_graph_needs_as_many_edges_as_nodes():
    for edges in itertools.combinations(itertools.permutations(range(4), 2), 3):
        g = nx.DiGraph()
        g.add_nodes_from(range(4))
        g.add_edges_from(edges)
        assert not nx.is_strongly_connected(g)


def _has_spanning_ring(out_sets):
    first, *rest = sorted(out_sets)
    for order in itertools.permutations(rest):
        cycle = [first, *order, first]
        if all(b in out_sets[a] for a, b in zip(cycle, cycle[1:])):
            return True
    return False


def _best_ring_topology_l_max(nodes, params):
    families = [extended_feasible_set(n.id, nodes, params) for n in nodes]
    best = None
    for choice in itertools.product(*families):
        out_sets = {n.id: out_set for n, out_set in zip(nodes, choice)}
        if not _has_spanning_ring(out_sets):
            continue
        g = nx.DiGraph()
        g.add_nodes_from(out_sets)
        g.add_edges_from((i, j) for i, js in out_sets.items() for j in js)
        l_max, _ = max_shortest_path(g)
        best = l_max if best is None else min(best, l_max)
    return best


def _random_nodes(rng, count, out_budget):
    return [
        UavNode(
            id=i,
            position=(*rng.uniform(0, 1000, size=2), 250.0),
            dataset_size=1000,
            max_power_w=dbm_to_watts(rng.uniform(0, 20)),
            out_budget=out_budget,
        )
        for i in range(count)
    ]


@pytest.mark.parametrize("out_budget", [1, 2])
def test_random_formations_satisfy_constraints(constraints, out_budget):
    rng = np.random.default_rng(2024)
    successes, attempts = 0, 0
    while successes < 200:
        attempts += 1
        assert attempts < 20_000
        count = int(rng.integers(3, 7))
        params = ConstraintParams(10.0, 0.01, 11, 0.5, rb_budget=count * out_budget)
        nodes = _random_nodes(rng, count, out_budget)
        try:
            graph = network_formation(nodes, params)
        except InfeasibleError:
            continue
        successes += 1
        assert graph.is_strongly_connected()
        assert graph.num_edges == count * out_budget
        assert all(graph.out_degree(i) == out_budget for i in graph.node_ids)
        assert audit_constraints(graph, params) == []
        assert _has_spanning_ring({i: graph.out_set(i) for i in graph.node_ids})
        l_max, _ = max_shortest_path(graph)
        if out_budget == 1:
            assert l_max == count - 1
        else:
            assert l_max <= count - 1
        if count <= 5:
            assert l_max == _best_ring_topology_l_max(nodes, params)


def test_split_rb_budget():
    assert split_rb_budget(10, 4) == [3, 3, 2, 2]
    assert split_rb_budget(4, 4) == [1, 1, 1, 1]
    with pytest.raises(ConfigError):
        split_rb_budget(3, 4)


def test_graph_json_round_trip(tmp_path, ring4):
    path = tmp_path / "graph.json"
    ring4.save_json(path)
    assert UavGraph.load_json(path) == ring4


def test_graph_rejects_self_loop():
    with pytest.raises(ConfigError):
        UavGraph(line_nodes(2), [LinkBudget(0, 0, 1.0, 1.0, 1.0, 1.0)])
