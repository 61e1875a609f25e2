"""One agent's private knowledge: history, peer beliefs, Q-table, estimates.

AgentView is the information boundary of the decentralized setting: frequency
estimates combine the agent's own visit window with per-peer expected visit
mass, and nothing here reads the engine's ground truth.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import learner, policy
from .history import FREQUENCY_WINDOW, TRANSITION_WINDOW, VisitationHistory
from .learner import LearnerParams, QTable
from .policy import PeerBelief, TransitionMatrix
from .world import Circle, PatrolWorld


@dataclass
class AgentView:
    agent_id: int
    circle: Circle
    required: list[float]  # per ring index, percent
    params: LearnerParams
    rng: np.random.Generator
    transition_window: int = TRANSITION_WINDOW
    frequency_window: int = FREQUENCY_WINDOW
    history: VisitationHistory = None
    own_matrix: TransitionMatrix = None
    peers: dict[int, PeerBelief] = field(default_factory=dict)
    q: QTable = field(default_factory=dict)
    all_required: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.history is None:
            self.history = VisitationHistory(self.agent_id, capacity=self.transition_window)
        if self.own_matrix is None:
            self.own_matrix = policy.neighbor_uniform(self.circle)
        self._index = {node: i for i, node in enumerate(self.circle.nodes)}
        self._own_window: deque = deque()
        self._own_counts = [0] * len(self.circle)
        self._peer_list: list[tuple[PeerBelief, list[int]]] = []
        self._rebuild_peer_maps()

    @classmethod
    def create(
        cls,
        agent_id: int,
        world: PatrolWorld,
        params: LearnerParams,
        rng: np.random.Generator,
        transition_window: int = TRANSITION_WINDOW,
        frequency_window: int = FREQUENCY_WINDOW,
    ) -> "AgentView":
        circle = world.agent_circle(agent_id)
        view = cls(
            agent_id=agent_id,
            circle=circle,
            required=[world.required(n) for n in circle.nodes],
            params=params,
            rng=rng,
            transition_window=transition_window,
            frequency_window=frequency_window,
            all_required={n: world.required(n) for n in world.nodes},
        )
        for peer_id, circle_id in world.assignments.items():
            if peer_id != agent_id:
                view.peers[peer_id] = PeerBelief.initial(
                    peer_id, world.circle(circle_id), window_capacity=frequency_window
                )
        view._rebuild_peer_maps()
        return view

    # -- indexing ------------------------------------------------------------

    def ring_index(self, node: int) -> int:
        try:
            return self._index[node]
        except KeyError:
            from .world import NodeNotOnCircle

            raise NodeNotOnCircle(
                f"node {node} is not on agent {self.agent_id}'s circle"
            ) from None

    def _rebuild_peer_maps(self) -> None:
        # per peer, own ring index -> peer ring index (or -1 off-circle)
        self._peer_list = []
        for belief in self.peers.values():
            mapping = [
                belief.index_of(node) if belief.index_of(node) is not None else -1
                for node in self.circle.nodes
            ]
            self._peer_list.append((belief, mapping))

    # -- per-step bookkeeping --------------------------------------------------

    def observe(self, step: int) -> None:
        """Advance every peer belief one step (they move when we do)."""
        for belief, _ in self._peer_list:
            belief.advance(step)

    def record_own(self, step: int, node: int) -> None:
        from .history import record_visit

        record_visit(self.history, step, node)
        idx = self._index[node]
        self._own_window.append(idx)
        self._own_counts[idx] += 1
        if len(self._own_window) > self.frequency_window:
            self._own_counts[self._own_window.popleft()] -= 1

    def refresh_own_matrix(self) -> None:
        self.own_matrix = policy.estimate_transitions(
            self.history, self.circle, self.transition_window
        )

    # -- estimation ------------------------------------------------------------

    def estimate_ring(self, ring_idx: int) -> float:
        """Estimated team visitation frequency (percent) of a node on own circle."""
        own_len = len(self._own_window)
        value = 100.0 * self._own_counts[ring_idx] / own_len if own_len else 0.0
        for belief, mapping in self._peer_list:
            j = mapping[ring_idx]
            if j >= 0:
                plen = belief.window_len()
                if plen:
                    value += 100.0 * belief.mass_at(j) / plen
        return value

    def estimate_node(self, node: int) -> float:
        """Estimated team frequency of any node (own circle or a peer's)."""
        idx = self._index.get(node)
        if idx is not None:
            return self.estimate_ring(idx)
        value = 0.0
        for belief, _ in self._peer_list:
            j = belief.index_of(node)
            if j is not None:
                plen = belief.window_len()
                if plen:
                    value += 100.0 * belief.mass_at(j) / plen
        return value

    def required_at(self, node: int) -> float:
        # target frequencies for all nodes are given to every agent at t = 0
        return self.all_required.get(node, 0.0)

    def state_at(self, ring_idx: int) -> learner.ObservedState:
        """Binned deficits of nodes (i-2, i-1, i, i+1) around ring position i."""
        m = len(self.circle)
        edges = self.params.bin_edges
        bins = []
        for off in learner.STATE_OFFSETS:
            j = (ring_idx + off) % m
            delta = self.required[j] - self.estimate_ring(j)
            bins.append(learner.bin_deficit(delta, edges))
        return tuple(bins)

    # -- communication -----------------------------------------------------------

    def payload(self, step: int, position: int):
        from .comms import ExchangePayload

        recent = tuple(self.history.recent(self.frequency_window))
        return ExchangePayload(
            sender=self.agent_id,
            position=position,
            recent=recent,
            matrix=self.own_matrix.probs.copy(),
        )

    def receive(self, step: int, payload) -> None:
        belief = self.peers.get(payload.sender)
        if belief is None:
            return
        belief.ingest(step, payload.position, payload.recent, payload.matrix)

    # -- world mutation support ----------------------------------------------------

    def apply_world_change(self, world: PatrolWorld) -> None:
        """Re-anchor to a mutated world: new ring, requirements, belief shapes.

        Node ids are stable across mutations, so histories carry over; ring-
        indexed structures are remapped and the own chain re-estimated from
        the surviving history (stale non-ring transitions are dropped there).
        """
        new_circle = world.agent_circle(self.agent_id)
        old_window_nodes = [self.circle.nodes[i] for i in self._own_window]
        self.circle = new_circle
        self.required = [world.required(n) for n in new_circle.nodes]
        self.all_required = {n: world.required(n) for n in world.nodes}
        self._index = {node: i for i, node in enumerate(new_circle.nodes)}
        self._own_window = deque(self._index[n] for n in old_window_nodes)
        self._own_counts = [0] * len(new_circle)
        for idx in self._own_window:
            self._own_counts[idx] += 1
        self.refresh_own_matrix()
        for peer_id, circle_id in world.assignments.items():
            if peer_id == self.agent_id:
                continue
            belief = self.peers[peer_id]
            peer_circle = world.circle(circle_id)
            if belief.nodes != peer_circle.nodes:
                self.peers[peer_id] = _remap_belief(belief, peer_circle)
        self._rebuild_peer_maps()


def _remap_belief(old: PeerBelief, circle: Circle) -> PeerBelief:
    """Carry a peer belief across a ring change (nodes inserted into the circle).

    Mass for surviving nodes is kept; new nodes start at zero mass. The matrix
    is remapped by node id, entries invalidated by the new ring geometry are
    zeroed, and emptied rows fall back to neighbor-uniform.
    """
    m_new = len(circle.nodes)
    old_index = {node: i for i, node in enumerate(old.nodes)}
    probs = np.zeros((m_new, m_new))
    for i, a in enumerate(circle.nodes):
        oi = old_index.get(a)
        if oi is None:
            probs[i] = policy.fallback_row(m_new, i)
            continue
        for j, b in enumerate(circle.nodes):
            if j != (i - 1) % m_new and j != (i + 1) % m_new:
                continue
            oj = old_index.get(b)
            if oj is not None:
                probs[i, j] = old.matrix[oi, oj]
        total = probs[i].sum()
        if total > 0:
            probs[i] /= total
        else:
            probs[i] = policy.fallback_row(m_new, i)

    def remap_vec(vec: np.ndarray) -> np.ndarray:
        out = np.zeros(m_new)
        for i, node in enumerate(circle.nodes):
            oi = old_index.get(node)
            if oi is not None:
                out[i] = vec[oi]
        return out

    window = deque(remap_vec(v) for v in old.window)
    mass_sum = np.zeros(m_new)
    for v in window:
        mass_sum += v
    return PeerBelief(
        peer=old.peer,
        circle_id=circle.id,
        nodes=circle.nodes,
        matrix=probs,
        belief=remap_vec(old.belief),
        window=window,
        mass_sum=mass_sum,
        synced_until=old.synced_until,
        window_capacity=old.window_capacity,
    )
