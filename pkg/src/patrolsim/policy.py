"""Markov-chain policies: transition estimation, stationary distributions, beliefs.

An agent's patrolling behavior is summarized as a first-order Markov chain
over its circle's nodes, estimated by counting moves in its visitation
history. Exchanged chains let peers propagate a probability distribution
("belief") over each other's positions between communication events.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .history import FREQUENCY_WINDOW, TRANSITION_WINDOW, VisitationHistory
from .world import Circle

STATIONARY_DAMPING = 0.01


class DimensionMismatch(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@dataclass
class TransitionMatrix:
    """Row-stochastic move probabilities over one circle's nodes (ring order)."""

    circle_id: int
    nodes: tuple[int, ...]
    probs: np.ndarray

    def copy(self) -> "TransitionMatrix":
        return TransitionMatrix(self.circle_id, self.nodes, self.probs.copy())


def fallback_row(size: int, index: int) -> np.ndarray:
    """Uniform mass on the ring neighbors of `index`: the only moves the model allows."""
    row = np.zeros(size)
    row[(index - 1) % size] = 0.5
    row[(index + 1) % size] = 0.5
    return row


def neighbor_uniform(circle: Circle) -> TransitionMatrix:
    """The uninformed prior: each node moves to either ring neighbor with 1/2."""
    m = len(circle)
    probs = np.zeros((m, m))
    for i in range(m):
        probs[i] = fallback_row(m, i)
    return TransitionMatrix(circle.id, circle.nodes, probs)


def estimate_transitions(
    h: VisitationHistory, circle: Circle, window: int = TRANSITION_WINDOW
) -> TransitionMatrix:
    """Count observed moves in the recent history into a row-stochastic matrix.

    Rows of nodes never seen to move get the neighbor-uniform fallback.
    Transitions that are not ring moves on `circle` (possible when a ring was
    mutated after the history was recorded) are discarded.
    """
    m = len(circle)
    index = {node: i for i, node in enumerate(circle.nodes)}
    counts = np.zeros((m, m))
    entries = h.recent(window + 1)
    for (s0, a), (s1, b) in zip(entries, entries[1:]):
        if s1 != s0 + 1:
            continue
        i, j = index.get(a), index.get(b)
        if i is None or j is None:
            continue
        if j == (i - 1) % m or j == (i + 1) % m:
            counts[i, j] += 1.0
    probs = np.zeros((m, m))
    row_sums = counts.sum(axis=1)
    for i in range(m):
        if row_sums[i] > 0:
            probs[i] = counts[i] / row_sums[i]
        else:
            probs[i] = fallback_row(m, i)
    return TransitionMatrix(circle.id, circle.nodes, probs)


def stationary_policy(
    P: TransitionMatrix | np.ndarray,
    damping: float = STATIONARY_DAMPING,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Stationary distribution of the damped chain P' = (1-damping) P + damping U.

    Damping guarantees ergodicity (empirical chains of strict one-direction
    walkers are periodic), so the limit always exists. Power-iterates a row
    vector; stops once successive iterates differ by less than damping * tol
    in L1, which leaves the returned vector within `tol` of the true fixed
    point in the infinity norm.
    """
    probs = P.probs if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)
    m = probs.shape[0]
    if probs.shape != (m, m):
        raise DimensionMismatch(f"expected a square matrix, got {probs.shape}")
    damped = (1.0 - damping) * probs + damping / m
    b = np.full(m, 1.0 / m)
    stop = tol * max(damping, 1e-3)
    for _ in range(max_iter):
        nxt = b @ damped
        if np.abs(nxt - b).sum() < stop:
            return nxt
        b = nxt
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def propagate_belief(belief: np.ndarray, P: TransitionMatrix | np.ndarray) -> np.ndarray:
    """Advance a position distribution one step through the chain."""
    probs = P.probs if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)
    if belief.shape[0] != probs.shape[0]:
        raise DimensionMismatch(
            f"belief has {belief.shape[0]} states, matrix {probs.shape[0]}"
        )
    return belief @ probs


def expected_visit_mass(beliefs, node_index: int, window: int = FREQUENCY_WINDOW) -> float:
    """Total probability mass a peer placed on one node over the recent window.

    `beliefs` is the per-step series of position distributions, newest last.
    """
    tail = beliefs[-window:] if len(beliefs) > window else beliefs
    return float(sum(b[node_index] for b in tail))


@dataclass
class PeerBelief:
    """One agent's rolling estimate of where a peer has been.

    Holds the peer's last exchanged transition matrix, the current position
    distribution, and a per-step window of distributions whose running sum
    feeds frequency estimation. Exchanged histories overwrite window entries
    with exact point masses.
    """

    peer: int
    circle_id: int
    nodes: tuple[int, ...]
    matrix: np.ndarray
    belief: np.ndarray
    window: deque = field(default_factory=deque)
    mass_sum: np.ndarray | None = None
    synced_until: int = 0
    window_capacity: int = FREQUENCY_WINDOW

    @classmethod
    def initial(cls, peer: int, circle: Circle, window_capacity: int = FREQUENCY_WINDOW):
        m = len(circle)
        return cls(
            peer=peer,
            circle_id=circle.id,
            nodes=circle.nodes,
            matrix=neighbor_uniform(circle).probs,
            belief=np.full(m, 1.0 / m),
            window=deque(),
            mass_sum=np.zeros(m),
            synced_until=0,
            window_capacity=window_capacity,
        )

    def __post_init__(self):
        if self.mass_sum is None:
            self.mass_sum = np.zeros(len(self.nodes))
        self._index = {node: i for i, node in enumerate(self.nodes)}
        self._eye = np.eye(len(self.nodes))

    def index_of(self, node: int) -> int | None:
        return self._index.get(node)

    def advance(self, step: int) -> None:
        """Propagate the belief one step and append it to the mass window."""
        self.belief = self.belief @ self.matrix
        self.window.append(self.belief)
        self.mass_sum += self.belief
        if len(self.window) > self.window_capacity:
            self.mass_sum -= self.window.popleft()
        self._latest_step = step

    def ingest(self, step: int, position: int, recent, matrix: np.ndarray) -> None:
        """Apply an exchange payload received at `step`.

        Window entries covered by the communicated positions become exact
        point masses; the current belief collapses onto the peer's position
        and future propagation uses the communicated matrix.
        """
        self.matrix = matrix.copy()
        newest = step
        oldest = newest - len(self.window) + 1
        for s, node in recent:
            if s <= self.synced_until or s < oldest or s > newest:
                continue
            i = self._index.get(node)
            if i is None:
                continue
            slot = s - oldest
            onehot = self._eye[i]
            self.mass_sum -= self.window[slot]
            self.mass_sum += onehot
            self.window[slot] = onehot
        pos_idx = self._index.get(position)
        if pos_idx is not None:
            self.belief = self._eye[pos_idx]
            if self.window:
                slot = newest - oldest
                self.mass_sum -= self.window[slot]
                self.mass_sum += self.belief
                self.window[slot] = self.belief
        self.synced_until = max(self.synced_until, step)

    def mass_at(self, node_index: int) -> float:
        return float(self.mass_sum[node_index])

    def window_len(self) -> int:
        return len(self.window)
