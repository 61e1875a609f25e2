"""Tabular Q-learning over discretized frequency-deficit states.

The observable state is the binned requirement-minus-estimate deficit of the
four ring nodes nearest the agent (two behind, current, one ahead). Actions
are the two ring moves. States are built from the agent's own estimates only;
ground truth stays on the engine side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .world import LEFT, RIGHT

ObservedState = tuple[int, int, int, int]
QTable = dict[tuple, float]

STATE_OFFSETS = (-2, -1, 0, 1)
DEFAULT_BIN_EDGES = (-5.0, -1.0, 1.0, 5.0)

# How the raw occupancy signal (estimate minus requirement, the literal
# published form) enters the Q-update:
#   deficit  - maximize requirement shortfall served, r = F - f  (default;
#              the literal surplus signal rewards the agent for crowding
#              already-saturated nodes and diverges - see package docs)
#   surplus  - the literal signed value, r = f - F
#   abs      - penalize any deviation, r = -|f - F|
REWARD_MODES = ("deficit", "surplus", "abs")


@dataclass
class LearnerParams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon0: float = 1.0
    epsilon_min: float = 0.01
    epsilon_tau: float = 1e5
    reward_mode: str = "deficit"
    bin_edges: tuple[float, float, float, float] = DEFAULT_BIN_EDGES

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not self.epsilon_min <= self.epsilon0 <= 1.0:
            raise ValueError("need epsilon_min <= epsilon0 <= 1")
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(f"reward_mode must be one of {REWARD_MODES}")


def bin_deficit(delta: float, edges=DEFAULT_BIN_EDGES) -> int:
    """Map a deficit (required minus estimated, percent) to bins 1..5.

    Boundaries: bin 1 iff delta <= -5, bin 2 iff -5 < delta <= -1,
    bin 3 iff -1 < delta < 1, bin 4 iff 1 <= delta < 5, bin 5 iff delta >= 5.
    """
    e0, e1, e2, e3 = edges
    if delta <= e0:
        return 1
    if delta <= e1:
        return 2
    if delta < e2:
        return 3
    if delta < e3:
        return 4
    return 5


def discretize_state(view, position: int, now: int) -> ObservedState:
    """Observed state around `position` (a node on the view's circle)."""
    ring_idx = view.ring_index(position)
    return view.state_at(ring_idx)


def select_action(q: QTable, s: ObservedState, epsilon: float, rng) -> int:
    """Epsilon-greedy over {LEFT, RIGHT} with uniform random tie-breaking."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return LEFT if rng.random() < 0.5 else RIGHT
    q_left = q.get(s + (LEFT,), 0.0)
    q_right = q.get(s + (RIGHT,), 0.0)
    if q_left == q_right:
        return LEFT if rng.random() < 0.5 else RIGHT
    return LEFT if q_left > q_right else RIGHT


def compute_reward(view, node: int, now: int) -> float:
    """The raw occupancy signal at `node`: estimated frequency minus requirement.

    Positive for surplus, as published; `shape_reward` applies the configured
    sign convention before the Q-update.
    """
    return view.estimate_node(node) - view.required_at(node)


def shape_reward(raw: float, mode: str) -> float:
    if mode == "deficit":
        return -raw
    if mode == "abs":
        return -abs(raw)
    return raw


def q_update(
    q: QTable,
    s: ObservedState,
    a: int,
    reward: float,
    s_next: ObservedState,
    params: LearnerParams,
) -> QTable:
    """One tabular Q-learning step; missing entries read as zero."""
    key = s + (a,)
    best_next = max(q.get(s_next + (LEFT,), 0.0), q.get(s_next + (RIGHT,), 0.0))
    current = q.get(key, 0.0)
    q[key] = current + params.alpha * (reward + params.gamma * best_next - current)
    return q


def epsilon_at(step: int, params: LearnerParams) -> float:
    """Exploration rate: exponential decay from epsilon0, floored at epsilon_min."""
    return max(params.epsilon_min, params.epsilon0 * math.exp(-step / params.epsilon_tau))
