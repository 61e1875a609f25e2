"""Patrol environment: intersecting circle graphs with per-node visitation requirements.

A world is a union of undirected ring graphs ("circles"). Nodes may belong to
several circles; each agent is assigned to one circle and moves along its ring
only. Every node carries a component frequency C (percent of one agent's
capacity) and a required visitation frequency F = r * C, where r is the team
size.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

LEFT = 0
RIGHT = 1

ACTION_NAMES = {LEFT: "left", RIGHT: "right"}

# Component frequencies must sum to at most one agent-capacity (100%); allow
# float dust from 2-decimal config values.
CAPACITY_LIMIT = 100.0
_CAPACITY_EPS = 1e-9


class WorldError(ValueError):
    """Base class for world construction and mutation failures."""


class DuplicateNodeInCircle(WorldError):
    pass


class EmptyCircle(WorldError):
    pass


class UnassignedCircle(WorldError):
    pass


class CapacityExceeded(WorldError):
    def __init__(self, total: float):
        super().__init__(
            f"component frequencies sum to {total:.2f}%, exceeding {CAPACITY_LIMIT:.0f}%"
        )
        self.total = total


class UnknownNode(WorldError):
    pass


class NodeNotOnCircle(WorldError):
    pass


class InvalidInsertion(WorldError):
    pass


@dataclass(frozen=True)
class Circle:
    """An undirected ring; edges are consecutive ring pairs plus the closing pair."""

    id: int
    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) < 3:
            raise EmptyCircle(f"circle {self.id} needs at least 3 nodes, got {len(self.nodes)}")
        if len(set(self.nodes)) != len(self.nodes):
            raise DuplicateNodeInCircle(f"circle {self.id} repeats a node: {self.nodes}")

    def __len__(self) -> int:
        return len(self.nodes)

    def index_of(self, node: int) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise NodeNotOnCircle(f"node {node} is not on circle {self.id}") from None

    def step(self, at: int, direction: int) -> int:
        """Cyclic predecessor (LEFT) or successor (RIGHT) of `at` in ring order."""
        i = self.index_of(at)
        offset = 1 if direction == RIGHT else -1
        return self.nodes[(i + offset) % len(self.nodes)]

    def neighbors(self, node: int) -> tuple[int, int]:
        i = self.index_of(node)
        m = len(self.nodes)
        return self.nodes[(i - 1) % m], self.nodes[(i + 1) % m]

    def edges(self) -> list[tuple[int, int]]:
        m = len(self.nodes)
        return [(self.nodes[i], self.nodes[(i + 1) % m]) for i in range(m)]


@dataclass(frozen=True)
class FrequencyRequirement:
    """Per-node frequency requirement on the percent scale.

    `required` is always r * component, so required/component recovers the
    team size for any node with a positive component.
    """

    component: float
    required: float

    @classmethod
    def from_component(cls, component: float, r: int) -> "FrequencyRequirement":
        return cls(component=component, required=r * component)


@dataclass(frozen=True)
class PatrolWorld:
    """Validated union of circles with requirements and agent assignments.

    Immutable: mutations return new worlds (see `apply_mutation`).
    """

    circles: tuple[Circle, ...]
    requirements: dict[int, FrequencyRequirement]
    assignments: dict[int, int]  # agent id -> circle id
    adjacency: dict[int, frozenset[int]]  # union-graph neighbors per node

    @property
    def r(self) -> int:
        return len(self.assignments)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.adjacency)

    def circle(self, circle_id: int) -> Circle:
        for c in self.circles:
            if c.id == circle_id:
                return c
        raise WorldError(f"no circle with id {circle_id}")

    def agent_circle(self, agent_id: int) -> Circle:
        return self.circle(self.assignments[agent_id])

    def component(self, node: int) -> float:
        req = self.requirements.get(node)
        return req.component if req is not None else 0.0

    def required(self, node: int) -> float:
        req = self.requirements.get(node)
        return req.required if req is not None else 0.0


# --- mutations -------------------------------------------------------------

@dataclass(frozen=True)
class SwapRequirements:
    a: int
    b: int


@dataclass(frozen=True)
class SetRequirement:
    """Set a node's required frequency F (percent); component becomes F/r."""

    node: int
    required_percent: float


@dataclass(frozen=True)
class InsertNode:
    """Insert a new node into a circle's ring between two adjacent nodes."""

    circle: int
    after: int
    before: int
    node: int
    required_percent: float


@dataclass(frozen=True)
class RemoveRequirement:
    """Drop a node's requirement entry; the node stays on its rings with F = 0."""

    node: int


WorldMutation = SwapRequirements | SetRequirement | InsertNode | RemoveRequirement


# --- construction ----------------------------------------------------------

def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def build_world(config: dict) -> PatrolWorld:
    """Build and validate a world from a config dict.

    Expected keys: `circles` (list of node-id rings), `component_percent`
    (node -> percent, string or int keys), `agents` (list of {id, circle}).
    """
    circles = tuple(
        Circle(id=i + 1, nodes=tuple(ring)) for i, ring in enumerate(config["circles"])
    )
    all_nodes: set[int] = set()
    for c in circles:
        all_nodes.update(c.nodes)

    components = {int(k): float(v) for k, v in config.get("component_percent", {}).items()}
    for node in components:
        if node not in all_nodes:
            raise UnknownNode(f"component_percent lists node {node}, which is on no circle")

    assignments: dict[int, int] = {}
    for entry in config["agents"]:
        agent_id, circle_id = int(entry["id"]), int(entry["circle"])
        if agent_id in assignments:
            raise WorldError(f"agent {agent_id} assigned twice")
        if not any(c.id == circle_id for c in circles):
            raise WorldError(f"agent {agent_id} assigned to missing circle {circle_id}")
        assignments[agent_id] = circle_id

    assigned = set(assignments.values())
    for c in circles:
        if c.id not in assigned:
            raise UnassignedCircle(f"circle {c.id} has no assigned agent")

    r = len(assignments)
    requirements = {
        node: FrequencyRequirement.from_component(components.get(node, 0.0), r)
        for node in sorted(all_nodes)
    }
    world = PatrolWorld(
        circles=circles,
        requirements=requirements,
        assignments=assignments,
        adjacency=_union_adjacency(circles),
    )
    validate_capacity(world)
    return world


def _union_adjacency(circles: tuple[Circle, ...]) -> dict[int, frozenset[int]]:
    nbrs: dict[int, set[int]] = {}
    for c in circles:
        for a, b in c.edges():
            nbrs.setdefault(a, set()).add(b)
            nbrs.setdefault(b, set()).add(a)
    return {node: frozenset(s) for node, s in nbrs.items()}


# --- operations ------------------------------------------------------------

def validate_capacity(world: PatrolWorld) -> None:
    """Raise CapacityExceeded unless the component frequencies sum to <= 100%."""
    total = sum(req.component for req in world.requirements.values())
    if total > CAPACITY_LIMIT + _CAPACITY_EPS:
        raise CapacityExceeded(total)


def capacity_sum(world: PatrolWorld) -> float:
    return sum(req.component for req in world.requirements.values())


def circle_step(world: PatrolWorld, circle_id: int, at: int, direction: int) -> int:
    return world.circle(circle_id).step(at, direction)


def union_neighbors(world: PatrolWorld, at: int) -> frozenset[int]:
    try:
        return world.adjacency[at]
    except KeyError:
        raise UnknownNode(f"node {at} is on no circle") from None


def apply_mutation(world: PatrolWorld, m: WorldMutation) -> PatrolWorld:
    """Return a new world with the mutation applied and revalidated."""
    r = world.r
    circles = world.circles
    reqs = dict(world.requirements)

    if isinstance(m, SwapRequirements):
        _require_known(world, m.a)
        _require_known(world, m.b)
        reqs[m.a], reqs[m.b] = (
            world.requirements.get(m.b, FrequencyRequirement.from_component(0.0, r)),
            world.requirements.get(m.a, FrequencyRequirement.from_component(0.0, r)),
        )
    elif isinstance(m, SetRequirement):
        _require_known(world, m.node)
        reqs[m.node] = FrequencyRequirement.from_component(m.required_percent / r, r)
    elif isinstance(m, RemoveRequirement):
        _require_known(world, m.node)
        reqs.pop(m.node, None)
    elif isinstance(m, InsertNode):
        circles = _insert_into_ring(world, m)
        reqs[m.node] = FrequencyRequirement.from_component(m.required_percent / r, r)
    else:
        raise WorldError(f"unknown mutation {m!r}")

    mutated = PatrolWorld(
        circles=circles,
        requirements=reqs,
        assignments=dict(world.assignments),
        adjacency=_union_adjacency(circles),
    )
    validate_capacity(mutated)
    return mutated


def apply_mutations(world: PatrolWorld, mutations) -> PatrolWorld:
    for m in mutations:
        world = apply_mutation(world, m)
    return world


def _require_known(world: PatrolWorld, node: int) -> None:
    if node not in world.adjacency:
        raise UnknownNode(f"node {node} is on no circle")


def _insert_into_ring(world: PatrolWorld, m: InsertNode) -> tuple[Circle, ...]:
    target = world.circle(m.circle)
    if m.node in world.adjacency:
        raise InvalidInsertion(f"node {m.node} already exists")
    ring = target.nodes
    if m.after not in ring or m.before not in ring:
        raise UnknownNode(f"insertion endpoints {m.after}/{m.before} not on circle {m.circle}")
    i, j = ring.index(m.after), ring.index(m.before)
    mlen = len(ring)
    if (i + 1) % mlen == j:
        new_ring = ring[: i + 1] + (m.node,) + ring[i + 1 :]
    elif (j + 1) % mlen == i:
        new_ring = ring[: j + 1] + (m.node,) + ring[j + 1 :]
    else:
        raise InvalidInsertion(
            f"nodes {m.after} and {m.before} are not adjacent on circle {m.circle}"
        )
    replaced = Circle(id=target.id, nodes=new_ring)
    return tuple(replaced if c.id == target.id else c for c in world.circles)


# --- mutation file format ----------------------------------------------------

def mutation_from_dict(d: dict) -> WorldMutation:
    op = d["op"]
    if op == "swap_requirements":
        return SwapRequirements(a=int(d["a"]), b=int(d["b"]))
    if op == "set_requirement":
        return SetRequirement(node=int(d["node"]), required_percent=float(d["required_percent"]))
    if op == "insert_node":
        return InsertNode(
            circle=int(d["circle"]),
            after=int(d["after"]),
            before=int(d["before"]),
            node=int(d["node"]),
            required_percent=float(d["required_percent"]),
        )
    if op == "remove_requirement":
        return RemoveRequirement(node=int(d["node"]))
    raise WorldError(f"unknown mutation op {op!r}")


def load_mutations(path: str | Path) -> list[WorldMutation]:
    with open(path) as fh:
        data = json.load(fh)
    return [mutation_from_dict(d) for d in data]
