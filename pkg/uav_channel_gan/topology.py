"""UAV exchange topology: A2A link budgets, feasible sets, ring search and network formation."""

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Tuple

import networkx as nx
import numpy as np

from uav_channel_gan.antenna import SPEED_OF_LIGHT
from uav_channel_gan.exceptions import (
    ConfigError,
    FormationError,
    GraphConnectivityError,
    RingNotFoundError,
)
from uav_channel_gan.utils import linear_to_db, noise_power_watts

# Relative slack when comparing against power/SNR/time limits.
_TOL = 1e-9


@dataclass(frozen=True)
class UavNode:
    id: int
    position: Tuple[float, float, float]
    dataset_size: int
    max_power_w: float
    out_budget: int = 1

    def __post_init__(self):
        if self.out_budget < 1:
            raise ConfigError(f"UAV {self.id}: out_budget must be >= 1, got {self.out_budget}")
        if self.dataset_size < 1:
            raise ConfigError(f"UAV {self.id}: dataset_size must be >= 1, got {self.dataset_size}")
        if self.max_power_w <= 0:
            raise ConfigError(f"UAV {self.id}: max_power_w must be positive")


@dataclass(frozen=True)
class ConstraintParams:
    """Constraints on A2A sample exchange."""

    snr_threshold: float
    tx_time_limit: float
    sample_scalars: float
    share_ratio: float
    rb_budget: int
    bits_per_scalar: int = 32
    bandwidth_hz: float = 2e6
    carrier_hz: float = 2.4e9
    noise_psd_dbm_per_hz: float = -174.0

    def __post_init__(self):
        errors = []
        if self.snr_threshold <= 0:
            errors.append(f"snr_threshold must be positive, got {self.snr_threshold}")
        if self.tx_time_limit <= 0:
            errors.append(f"tx_time_limit must be positive, got {self.tx_time_limit}")
        if self.sample_scalars <= 0:
            errors.append(f"sample_scalars must be positive, got {self.sample_scalars}")
        if not 0 < self.share_ratio <= 1:
            errors.append(f"share_ratio must be in (0, 1], got {self.share_ratio}")
        if self.bandwidth_hz <= 0 or self.carrier_hz <= 0:
            errors.append("bandwidth_hz and carrier_hz must be positive")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def sample_bits(self) -> float:
        """rho_bits: bits per exchanged sample."""
        return self.sample_scalars * self.bits_per_scalar

    @property
    def noise_power_w(self) -> float:
        return noise_power_watts(self.noise_psd_dbm_per_hz, self.bandwidth_hz)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class LinkBudget:
    src: int
    dst: int
    path_gain: float
    tx_power_w: float
    bandwidth_hz: float
    noise_power_w: float

    @property
    def snr(self) -> float:
        return self.tx_power_w * self.path_gain / self.noise_power_w

    @property
    def snr_db(self) -> float:
        return linear_to_db(self.snr)

    @property
    def rate_bps(self) -> float:
        return a2a_rate(self.tx_power_w, self.path_gain, self.noise_power_w, self.bandwidth_hz)

    def to_dict(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "path_gain": self.path_gain,
            "power_w": self.tx_power_w,
            "bandwidth_hz": self.bandwidth_hz,
            "noise_power_w": self.noise_power_w,
            "rate_bps": self.rate_bps,
            "snr_db": self.snr_db,
        }


def a2a_rate(power: float, gain: float, noise: float, bandwidth: float) -> float:
    """Shannon rate w_b * log2(1 + P h / sigma^2) in bits/s."""
    return float(bandwidth * np.log2(1.0 + power * gain / noise))


def free_space_gain(distance: float, wavelength: float) -> float:
    """Free-space channel power gain (lambda / (4 pi d))^2."""
    if distance <= 0:
        raise ConfigError(f"Distance between UAVs must be positive, got {distance}")
    return float((wavelength / (4 * np.pi * distance)) ** 2)


def link_budget(src: UavNode, dst: UavNode, params: ConstraintParams) -> LinkBudget:
    """
    Minimum-power budget of the edge src -> dst.

    The power is the smallest one meeting both the SNR threshold and the transmission-time
    limit for eta * S_src samples.

    Args:
        src: Transmitting UAV
        dst: Receiving UAV
        params: Exchange constraints

    Returns:
        Link budget of the edge
    """
    distance = float(np.linalg.norm(np.subtract(src.position, dst.position)))
    gain = free_space_gain(distance, params.wavelength_m)
    bits = params.share_ratio * src.dataset_size * params.sample_bits
    snr_for_time = 2.0 ** (bits / (params.tx_time_limit * params.bandwidth_hz)) - 1.0
    snr_needed = max(params.snr_threshold, snr_for_time)
    noise = params.noise_power_w
    return LinkBudget(src.id, dst.id, gain, snr_needed * noise / gain, params.bandwidth_hz, noise)


def _edge_ok(budget: LinkBudget, src: UavNode, params: ConstraintParams) -> bool:
    bits = params.share_ratio * src.dataset_size * params.sample_bits
    return (
        budget.tx_power_w <= src.max_power_w * (1 + _TOL)
        and budget.snr >= params.snr_threshold * (1 - _TOL)
        and bits / budget.rate_bps <= params.tx_time_limit * (1 + _TOL)
    )


def _by_id(nodes: Iterable[UavNode]) -> dict[int, UavNode]:
    return {n.id: n for n in nodes}


def feasible_set(i: int, nodes: Sequence[UavNode], params: ConstraintParams) -> frozenset[int]:
    """UAVs j != i that i can reach under the power, SNR and time constraints."""
    index = _by_id(nodes)
    src = index[i]
    return frozenset(
        j
        for j, dst in index.items()
        if j != i and _edge_ok(link_budget(src, dst, params), src, params)
    )


def extended_feasible_set(
    i: int, nodes: Sequence[UavNode], params: ConstraintParams, out_budget: int | None = None
) -> list[frozenset[int]]:
    """
    All out_budget-element subsets of the feasible set whose summed powers fit P_max.

    Args:
        i: UAV id
        nodes: All UAVs
        params: Exchange constraints
        out_budget: Subset size O_i (defaults to the node's out_budget)

    Returns:
        Subsets in lexicographic order of their sorted members
    """
    index = _by_id(nodes)
    src = index[i]
    size = src.out_budget if out_budget is None else out_budget
    if size < 1:
        raise ConfigError(f"out_budget must be >= 1, got {size}")
    candidates = sorted(feasible_set(i, nodes, params))
    power = {j: link_budget(src, index[j], params).tx_power_w for j in candidates}
    return [
        frozenset(subset)
        for subset in itertools.combinations(candidates, size)
        if sum(power[j] for j in subset) <= src.max_power_w * (1 + _TOL)
    ]


@dataclass(frozen=True)
class NecessaryConditionReport:
    holds: bool
    empty: Tuple[int, ...] = ()
    uncovered: Tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.holds

    @property
    def diagnostic(self) -> str:
        if self.holds:
            return "every UAV has a feasible neighbour and is covered"
        parts = []
        if self.empty:
            parts.append(f"UAVs with empty feasible sets: {list(self.empty)}")
        if self.uncovered:
            parts.append(f"UAVs no one can reach: {list(self.uncovered)}")
        return "; ".join(parts)


def _coverage_report(
    ids: Iterable[int], sets: Mapping[int, Iterable[int]]
) -> NecessaryConditionReport:
    ids = sorted(ids)
    covered = set().union(*[set(s) for s in sets.values()]) if sets else set()
    empty = tuple(i for i in ids if not set(sets.get(i, ())))
    uncovered = tuple(i for i in ids if i not in covered)
    return NecessaryConditionReport(not empty and not uncovered, empty, uncovered)


def check_necessary_condition(
    nodes: Sequence[UavNode], params: ConstraintParams
) -> NecessaryConditionReport:
    """Every feasible set non-empty and their union covering all UAVs."""
    sets = {n.id: feasible_set(n.id, nodes, params) for n in nodes}
    return _coverage_report(sets.keys(), sets)


class UavGraph:
    """Directed exchange topology with a link budget on every edge. Immutable."""

    def __init__(self, nodes: Sequence[UavNode], budgets: Iterable[LinkBudget]):
        self._nodes = tuple(sorted(nodes, key=lambda n: n.id))
        self._graph = nx.DiGraph()
        for node in self._nodes:
            self._graph.add_node(node.id)
        for budget in budgets:
            if budget.src == budget.dst:
                raise ConfigError(f"Self-loop on UAV {budget.src}")
            if budget.src not in self._graph or budget.dst not in self._graph:
                raise ConfigError(f"Edge {budget.src}->{budget.dst} references an unknown UAV")
            self._graph.add_edge(budget.src, budget.dst, budget=budget)

    @property
    def nodes(self) -> tuple[UavNode, ...]:
        return self._nodes

    @property
    def node_ids(self) -> list[int]:
        return [n.id for n in self._nodes]

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    @property
    def edges(self) -> list[Tuple[int, int]]:
        return sorted(self._graph.edges())

    @property
    def num_edges(self) -> int:
        return self._graph.number_of_edges()

    def node(self, i: int) -> UavNode:
        return _by_id(self._nodes)[i]

    def budget(self, i: int, j: int) -> LinkBudget:
        return self._graph.edges[i, j]["budget"]

    def in_set(self, i: int) -> list[int]:
        return sorted(self._graph.predecessors(i))

    def out_set(self, i: int) -> list[int]:
        return sorted(self._graph.successors(i))

    def in_degree(self, i: int) -> int:
        return self._graph.in_degree(i)

    def out_degree(self, i: int) -> int:
        return self._graph.out_degree(i)

    def is_strongly_connected(self) -> bool:
        return self.num_nodes > 0 and nx.is_strongly_connected(self._graph)

    def to_networkx(self) -> nx.DiGraph:
        return self._graph.copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, UavGraph):
            return NotImplemented
        return self._nodes == other._nodes and [
            self.budget(i, j) for i, j in self.edges
        ] == [other.budget(i, j) for i, j in other.edges]

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": n.id,
                    "position": list(n.position),
                    "S": n.dataset_size,
                    "O": n.out_budget,
                    "max_power_w": n.max_power_w,
                }
                for n in self._nodes
            ],
            "edges": [self.budget(i, j).to_dict() for i, j in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UavGraph":
        nodes = [
            UavNode(
                id=int(n["id"]),
                position=tuple(float(v) for v in n["position"]),
                dataset_size=int(n["S"]),
                max_power_w=float(n["max_power_w"]),
                out_budget=int(n["O"]),
            )
            for n in data["nodes"]
        ]
        budgets = [
            LinkBudget(
                src=int(e["src"]),
                dst=int(e["dst"]),
                path_gain=float(e["path_gain"]),
                tx_power_w=float(e["power_w"]),
                bandwidth_hz=float(e["bandwidth_hz"]),
                noise_power_w=float(e["noise_power_w"]),
            )
            for e in data["edges"]
        ]
        return cls(nodes, budgets)

    def save_json(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_json(cls, path: Path | str) -> "UavGraph":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def as_digraph(graph: UavGraph | nx.DiGraph) -> nx.DiGraph:
    return graph.to_networkx() if isinstance(graph, UavGraph) else graph


def witness_pairs(graph: UavGraph | nx.DiGraph) -> Tuple[int, list[Tuple[int, int]]]:
    """
    Maximum shortest-path length and every ordered pair attaining it.

    Args:
        graph: Strongly connected exchange graph

    Returns:
        Tuple of (l_max, sorted witness pairs)
    """
    g = as_digraph(graph)
    dist = {u: dict(d) for u, d in nx.all_pairs_shortest_path_length(g)}
    ids = sorted(g.nodes)
    best, pairs = 0, []
    for u in ids:
        for v in ids:
            if u == v:
                continue
            if v not in dist[u]:
                raise GraphConnectivityError(u, v)
            d = dist[u][v]
            if d > best:
                best, pairs = d, [(u, v)]
            elif d == best:
                pairs.append((u, v))
    return best, pairs


def max_shortest_path(graph: UavGraph | nx.DiGraph) -> Tuple[int, Tuple[int, int] | None]:
    """l_max over all ordered pairs plus the first witness pair (None for one node)."""
    l_max, pairs = witness_pairs(graph)
    return l_max, (pairs[0] if pairs else None)


def node_max_shortest_path(graph: UavGraph | nx.DiGraph, i: int) -> float:
    """l_i^max: longest shortest path leaving node i (inf if some node is unreachable)."""
    g = as_digraph(graph)
    lengths = nx.single_source_shortest_path_length(g, i)
    if len(lengths) < g.number_of_nodes():
        return float("inf")
    return float(max(lengths.values()))


def min_loop_length(graph: UavGraph | nx.DiGraph, start: int) -> int:
    """Length of the shortest directed cycle through `start`."""
    g = as_digraph(graph)
    back = nx.single_source_shortest_path_length(g.reverse(copy=False), start)
    loops = [1 + back[s] for s in g.successors(start) if s in back]
    if not loops:
        raise GraphConnectivityError(start, start)
    return min(loops)


def completion_loop_length(graph: UavGraph | nx.DiGraph) -> int:
    """Shortest loop through a witness source, minimized over all witness pairs of l_max."""
    _, pairs = witness_pairs(graph)
    if not pairs:
        raise GraphConnectivityError(-1, -1)
    return min(min_loop_length(graph, u) for u in sorted({u for u, _ in pairs}))


def _hamiltonian_cycle(successors: Mapping[int, Iterable[int]]) -> list[int] | None:
    ids = sorted(successors)
    if len(ids) < 2:
        return None
    start = ids[0]
    path, visited = [start], {start}

    def extend() -> bool:
        if len(path) == len(ids):
            return start in successors[path[-1]]
        for j in sorted(successors[path[-1]]):
            if j in visited:
                continue
            path.append(j)
            visited.add(j)
            if extend():
                return True
            path.pop()
            visited.remove(j)
        return False

    return path if extend() else None


def build_ring(
    nodes: Sequence[UavNode],
    feasible_sets: Mapping[int, Iterable[int]],
    params: ConstraintParams,
) -> UavGraph:
    """
    Ring topology: a directed Hamiltonian cycle inside the feasible sets.

    Args:
        nodes: All UAVs
        feasible_sets: Feasible set of every UAV
        params: Exchange constraints (for the edge budgets)

    Returns:
        Ring graph with in/out-degree 1 everywhere
    """
    report = _coverage_report([n.id for n in nodes], feasible_sets)
    if not report:
        raise RingNotFoundError(f"Necessary condition fails: {report.diagnostic}")
    cycle = _hamiltonian_cycle({i: set(feasible_sets[i]) for i in _by_id(nodes)})
    if cycle is None:
        raise RingNotFoundError(
            "No directed Hamiltonian cycle within the feasible sets; UAVs must relocate"
        )
    index = _by_id(nodes)
    budgets = [
        link_budget(index[i], index[j], params) for i, j in zip(cycle, cycle[1:] + cycle[:1])
    ]
    return UavGraph(nodes, budgets)


def split_rb_budget(rb_budget: int, num_uavs: int) -> list[int]:
    """Out-degree budgets O_i = B // I, with the remainder given to the lowest ids."""
    if rb_budget < num_uavs:
        raise ConfigError(f"rb_budget ({rb_budget}) must be >= num_uavs ({num_uavs})")
    base, extra = divmod(rb_budget, num_uavs)
    return [base + (1 if i < extra else 0) for i in range(num_uavs)]


# Joint out-set combinations searched exhaustively before falling back to greedy removal.
_MAX_JOINT_TOPOLOGIES = 100_000


def _eccentricities(out_masks: Sequence[int]) -> list[int]:
    """l_i^max of every node of a strongly connected graph given as out-neighbour bitmasks."""
    n = len(out_masks)
    full = (1 << n) - 1
    result = []
    for source in range(n):
        seen = frontier = 1 << source
        depth = 0
        while seen != full:
            reached = 0
            for k in range(n):
                if frontier >> k & 1:
                    reached |= out_masks[k]
            frontier = reached & ~seen
            seen |= frontier
            depth += 1
        result.append(depth)
    return result


def _search_topologies(
    families: Mapping[int, Sequence[frozenset[int]]],
) -> dict[int, frozenset[int]] | None:
    ids = sorted(families)
    n = len(ids)
    position = {i: k for k, i in enumerate(ids)}
    masks = [[sum(1 << position[j] for j in subset) for subset in families[i]] for i in ids]
    # Every spanning ring, as (node, successor bit) pairs, with node 0 fixed first.
    rings = [
        [(order[k], 1 << order[(k + 1) % n]) for k in range(n)]
        for order in ((0,) + rest for rest in itertools.permutations(range(1, n)))
    ]
    best_key, best_choice = None, None
    for choice in itertools.product(*(range(len(m)) for m in masks)):
        out = [masks[k][c] for k, c in enumerate(choice)]
        if not any(all(out[k] & bit for k, bit in ring) for ring in rings):
            continue
        ecc = _eccentricities(out)
        key = (max(ecc), sum(ecc))
        if best_key is None or key < best_key:
            best_key, best_choice = key, choice
    if best_choice is None:
        return None
    return {i: families[i][c] for i, c in zip(ids, best_choice)}


@dataclass
class FormationBoard:
    """
    Broadcast channel: the current candidate out-set of every UAV, plus every UAV's extended
    feasible set family.
    """

    candidates: dict[int, set[int]]
    families: dict[int, list[frozenset[int]]] = field(default_factory=dict)
    _optimum: dict[int, frozenset[int]] | None = field(default=None, init=False, repr=False)

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.candidates)
        g.add_edges_from((i, j) for i, js in self.candidates.items() for j in js)
        return g

    def covered_without(self, i: int, j: int) -> bool:
        """Whether every UAV stays in some candidate set after i drops j."""
        covered = set()
        for k, js in self.candidates.items():
            covered |= js - {j} if k == i else js
        return covered >= set(self.candidates)

    def joint_size(self) -> int:
        """Number of out-set combinations over the broadcast families."""
        if not self.families:
            return 0
        return math.prod(len(family) for family in self.families.values())

    def joint_optimum(self) -> dict[int, frozenset[int]] | None:
        """
        One out-set per UAV minimizing (l_max, sum_i l_i^max) among the combinations of the
        broadcast families whose graph contains a spanning ring.

        The enumeration is deterministic, so every UAV that runs it reaches the same
        combination. Ties go to the first combination in id order, each family in
        lexicographic order.
        """
        if self._optimum is None and self.families:
            self._optimum = _search_topologies(self.families)
        return self._optimum


@dataclass
class FormationAgent:
    """
    One UAV's side of the distributed formation.

    The agent sees only its own link budgets and the broadcast board.
    """

    node: UavNode
    budgets: dict[int, LinkBudget]
    ring_successor: int

    def surplus(self, board: FormationBoard) -> int:
        return len(board.candidates[self.node.id]) - self.node.out_budget

    def _power_guard(self, remaining: set[int]) -> bool:
        others = sorted(remaining - {self.ring_successor})
        base = self.budgets[self.ring_successor].tx_power_w
        for subset in itertools.combinations(others, self.node.out_budget - 1):
            total = base + sum(self.budgets[j].tx_power_w for j in subset)
            if total <= self.node.max_power_w * (1 + _TOL):
                return True
        return False

    def choose_out_set(self, board: FormationBoard) -> frozenset[int]:
        """Own share of the joint optimum over the broadcast families."""
        optimum = board.joint_optimum()
        if optimum is None:
            raise FormationError(
                "No combination of feasible out-sets contains a ring; relocation needed"
            )
        chosen = optimum[self.node.id]
        missing = chosen - set(self.budgets)
        if missing:
            raise FormationError(f"UAV {self.node.id} has no link budget to {sorted(missing)}")
        return chosen

    def choose_removal(self, board: FormationBoard) -> int | None:
        """
        Edge to drop: the one whose removal least increases l_i^max.

        Ties go to the largest destination id; the ring edge is never dropped.
        """
        i = self.node.id
        current = board.candidates[i]
        graph = board.graph()
        before = node_max_shortest_path(graph, i)
        best_cost, best_j = None, None
        for j in sorted(current, reverse=True):
            if j == self.ring_successor:
                continue
            if not board.covered_without(i, j) or not self._power_guard(current - {j}):
                continue
            graph.remove_edge(i, j)
            cost = node_max_shortest_path(graph, i) - before
            graph.add_edge(i, j)
            if best_cost is None or cost < best_cost:
                best_cost, best_j = cost, j
        return best_j


def network_formation(
    nodes: Sequence[UavNode], params: ConstraintParams, exhaustive_max_uavs: int = 5
) -> UavGraph:
    """
    Distributed network formation under the RB, power, SNR and time constraints.

    Every UAV broadcasts its extended feasible set family. Up to exhaustive_max_uavs UAVs, each
    one evaluates every combination of out-sets and keeps its share of the combination with the
    smallest l_max that still contains a spanning ring. Larger swarms start from the dense
    graph over the families, protect one spanning ring and drop surplus edges round-robin by id
    until every out-degree equals O_i.

    Args:
        nodes: All UAVs with their out-budgets
        params: Exchange constraints
        exhaustive_max_uavs: Largest swarm formed by the exhaustive joint search

    Returns:
        Formed exchange graph
    """
    nodes = sorted(nodes, key=lambda n: n.id)
    index = _by_id(nodes)
    total_budget = sum(n.out_budget for n in nodes)
    if total_budget > params.rb_budget:
        raise FormationError(
            f"Out-budgets sum to {total_budget}, exceeding the RB budget {params.rb_budget}"
        )

    families: dict[int, list[frozenset[int]]] = {}
    candidates: dict[int, set[int]] = {}
    for node in nodes:
        families[node.id] = extended_feasible_set(node.id, nodes, params)
        candidates[node.id] = set().union(*families[node.id])
        if len(candidates[node.id]) < node.out_budget:
            raise FormationError(
                f"UAV {node.id} has {len(candidates[node.id])} feasible neighbours for "
                f"out-budget {node.out_budget}; relocation needed"
            )
    report = _coverage_report(index, candidates)
    if not report:
        raise FormationError(f"Necessary condition fails: {report.diagnostic}; relocation needed")

    cycle = _hamiltonian_cycle(candidates)
    if cycle is None:
        raise RingNotFoundError("No ring inside the extended feasible sets; relocation needed")
    successor = dict(zip(cycle, cycle[1:] + cycle[:1]))

    board = FormationBoard({i: set(js) for i, js in candidates.items()}, families)
    agents = [
        FormationAgent(
            node=node,
            budgets={j: link_budget(node, index[j], params) for j in candidates[node.id]},
            ring_successor=successor[node.id],
        )
        for node in nodes
    ]

    if len(nodes) <= exhaustive_max_uavs and board.joint_size() <= _MAX_JOINT_TOPOLOGIES:
        chosen = {agent.node.id: agent.choose_out_set(board) for agent in agents}
        for i, out_set in chosen.items():
            board.candidates[i] = set(out_set)

    while any(agent.surplus(board) > 0 for agent in agents):
        for agent in agents:
            if agent.surplus(board) <= 0:
                continue
            j = agent.choose_removal(board)
            if j is None:
                raise FormationError(f"UAV {agent.node.id} cannot drop any edge")
            board.candidates[agent.node.id].discard(j)

    budgets = [
        agent.budgets[j] for agent in agents for j in sorted(board.candidates[agent.node.id])
    ]
    graph = UavGraph(nodes, budgets)
    print(f"Formed network: {graph.num_edges} edges over {graph.num_nodes} UAVs")
    return graph


def audit_constraints(graph: UavGraph, params: ConstraintParams) -> list[str]:
    """
    Check every exchange constraint on a formed graph.

    Returns:
        Violation messages (empty when all constraints hold)
    """
    violations = []
    if graph.num_edges > params.rb_budget:
        violations.append(f"{graph.num_edges} edges exceed the RB budget {params.rb_budget}")
    for node in graph.nodes:
        total = 0.0
        for j in graph.out_set(node.id):
            budget = graph.budget(node.id, j)
            total += budget.tx_power_w
            if budget.snr < params.snr_threshold * (1 - _TOL):
                violations.append(
                    f"Edge {node.id}->{j}: SNR {budget.snr_db:.2f} dB below threshold"
                )
            bits = params.share_ratio * node.dataset_size * params.sample_bits
            if bits / budget.rate_bps > params.tx_time_limit * (1 + _TOL):
                violations.append(f"Edge {node.id}->{j}: transmission time exceeds limit")
        if total > node.max_power_w * (1 + _TOL):
            violations.append(f"UAV {node.id}: total power {total:.3g} W exceeds P_max")
    return violations
