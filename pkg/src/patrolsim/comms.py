"""Proximity-gated communication: contact detection and the exchange protocol.

Agents can communicate only while on the same node or union-graph-adjacent
nodes. Each step, the proximity graph's connected components of two or more
agents become contact events, and every participant sends every other its
current position, recent positions, and transition matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import PatrolWorld

SAME_NODE = "same_node"
ADJACENT_NODES = "adjacent_nodes"

COMM_COUNT_WINDOW = 1000


@dataclass(frozen=True)
class ContactEvent:
    step: int
    participants: frozenset[int]
    location: str  # SAME_NODE only when every participant occupies one node


@dataclass(frozen=True)
class ExchangePayload:
    sender: int
    position: int
    recent: tuple  # ((step, node), ...) oldest first
    matrix: np.ndarray


def detect_contacts(
    world: PatrolWorld, positions: dict[int, int], step: int = 0
) -> list[ContactEvent]:
    """Contact events: connected components of the step's proximity graph."""
    agents = sorted(positions)
    adjacency = world.adjacency
    seen: set[int] = set()
    events: list[ContactEvent] = []
    for root in agents:
        if root in seen:
            continue
        component = {root}
        frontier = [root]
        while frontier:
            a = frontier.pop()
            pa = positions[a]
            for b in agents:
                if b in component:
                    continue
                pb = positions[b]
                if pa == pb or pb in adjacency[pa]:
                    component.add(b)
                    frontier.append(b)
        seen |= component
        if len(component) >= 2:
            nodes = {positions[a] for a in component}
            location = SAME_NODE if len(nodes) == 1 else ADJACENT_NODES
            events.append(ContactEvent(step, frozenset(component), location))
    return events


def exchange(event: ContactEvent, views: dict, positions: dict[int, int], step: int) -> dict:
    """All-to-all payload exchange within one contact event's participants."""
    members = sorted(event.participants)
    payloads = {a: views[a].payload(step, positions[a]) for a in members}
    for receiver in members:
        for sender in members:
            if sender != receiver:
                views[receiver].receive(step, payloads[sender])
    return views


def communication_count(contact_steps, now: int, window: int = COMM_COUNT_WINDOW) -> int:
    """Number of recent steps with at least one contact (step-level, binary)."""
    lo = now - window
    return len({s for s in contact_steps if lo < s <= now})
