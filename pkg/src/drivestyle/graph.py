"""Per-timestep traffic-graphs and the cumulative neighbor-history state.

Two vehicles are connected at an instant iff their squared Euclidean
distance is strictly below the proximity threshold ``mu`` (m^2); the
squared distance is the edge cost. The cumulative state retains every
edge ever observed and remembers, per agent, which neighbors it has
already seen, so that the degree-centrality chain can count only first
encounters with slower vehicles.

``build_instant_graph`` is pure and may run for many frames in parallel.
``update_cumulative`` mutates shared state and must be applied in strict
frame order by a single writer.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, ValidationError
from .ingest import AgentFrame

DEFAULT_MU = 100.0  # m^2: a 10 m proximity radius
DEFAULT_CAPACITY = 256


def squared_distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return dx * dx + dy * dy


@dataclass
class InstantGraph:
    """Undirected weighted proximity graph over one frame's agents.

    ``edges`` maps an (id, id) pair, ordered by string comparison, to the
    squared-distance cost; every cost lies strictly inside (0, mu).
    """

    positions: dict[str, tuple[float, float]]
    edges: dict[tuple[str, str], float]
    mu: float

    def vertex_ids(self) -> list[str]:
        return list(self.positions)

    def neighbors(self, agent_id: str) -> dict[str, float]:
        """Adjacent agents of ``agent_id`` with their edge costs."""
        out: dict[str, float] = {}
        for (a, b), cost in self.edges.items():
            if a == agent_id:
                out[b] = cost
            elif b == agent_id:
                out[a] = cost
        return out


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def build_instant_graph(frame: Sequence[AgentFrame], mu: float) -> InstantGraph:
    """Connect exactly the agent pairs with squared distance < mu.

    Pure function of (frame, mu). Raises ValidationError on an empty
    frame, a non-positive mu, duplicate agent ids, or coincident agent
    positions (which would produce a zero-cost edge).
    """
    if mu <= 0:
        raise ValidationError(f"mu must be positive, got {mu}")
    if not frame:
        raise ValidationError("cannot build a traffic-graph from an empty frame")
    positions: dict[str, tuple[float, float]] = {}
    for fr in frame:
        if fr.agent_id in positions:
            raise ValidationError(f"duplicate agent_id {fr.agent_id!r} in frame")
        positions[fr.agent_id] = fr.position

    ids = list(positions)
    edges: dict[tuple[str, str], float] = {}
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            cost = squared_distance(positions[ids[i]], positions[ids[j]])
            if cost < mu:
                if cost == 0.0:
                    raise ValidationError(
                        f"agents {ids[i]!r} and {ids[j]!r} share a position; "
                        "edge costs must be strictly positive"
                    )
                edges[_edge_key(ids[i], ids[j])] = cost
    return InstantGraph(positions=positions, edges=edges, mu=mu)


@dataclass
class CumulativeAdjacency:
    """Fixed-capacity cumulative adjacency matrix plus seen-sets.

    Retained edge costs are the cost at first observation and are never
    updated. The whole state resets to zeros/empty when admitting the
    current frame's agents would push the number of distinct observed
    agents past ``capacity``.
    """

    capacity: int = DEFAULT_CAPACITY
    matrix: np.ndarray = None  # type: ignore[assignment]
    slots: dict[str, int] = field(default_factory=dict)
    seen: dict[str, set[str]] = field(default_factory=dict)
    reset_count: int = 0

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValidationError(f"capacity must be positive, got {self.capacity}")
        if self.matrix is None:
            self.matrix = np.zeros((self.capacity, self.capacity))

    def reset(self) -> None:
        self.matrix[:] = 0.0
        self.slots.clear()
        self.seen.clear()
        self.reset_count += 1

    def cost(self, a: str, b: str) -> float:
        """Retained cost between two agents, 0.0 when never connected."""
        if a not in self.slots or b not in self.slots:
            return 0.0
        return float(self.matrix[self.slots[a], self.slots[b]])

    def dump(self) -> str:
        """Dense text rendering of the occupied block, for inspection."""
        ids = sorted(self.slots, key=self.slots.get)
        lines = ["# " + ",".join(ids)]
        for a in ids:
            row = (repr(float(self.matrix[self.slots[a], self.slots[b]])) for b in ids)
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def update_cumulative(
    state: CumulativeAdjacency,
    graph: InstantGraph,
    velocities: Mapping[str, float],
) -> dict[str, int]:
    """Fold one instant graph into the cumulative state.

    Returns per-agent counts of *new* neighbors: first-ever edge partners
    that were strictly slower than the agent at this instant. Every new
    edge partner becomes "seen" regardless of the speed comparison.

    Must be called in frame order by a single writer; raises
    ContractViolationError when a graph vertex lacks a velocity entry.
    """
    ids = graph.vertex_ids()
    for agent_id in ids:
        if agent_id not in velocities:
            raise ContractViolationError(
                f"no velocity supplied for graph vertex {agent_id!r}"
            )

    incoming = [i for i in ids if i not in state.slots]
    if len(state.slots) + len(incoming) > state.capacity:
        if len(ids) > state.capacity:
            raise ValidationError(
                f"frame holds {len(ids)} agents, more than capacity {state.capacity}"
            )
        state.reset()
        incoming = ids
    for agent_id in incoming:
        state.slots[agent_id] = len(state.slots)

    counts = {agent_id: 0 for agent_id in ids}
    for (a, b), cost in graph.edges.items():
        sa, sb = state.slots[a], state.slots[b]
        if state.matrix[sa, sb] == 0.0:
            state.matrix[sa, sb] = cost
            state.matrix[sb, sa] = cost
        seen_a = state.seen.setdefault(a, set())
        seen_b = state.seen.setdefault(b, set())
        if b not in seen_a:
            if velocities[a] > velocities[b]:
                counts[a] += 1
            seen_a.add(b)
        if a not in seen_b:
            if velocities[b] > velocities[a]:
                counts[b] += 1
            seen_b.add(a)
    return counts
