"""Per-agent visitation records and windowed frequency estimates.

Each agent appends its position once per step to a bounded history. Actual
visitation frequency of a node is the percent of recent steps (a sliding
window) in which it was visited; before the window fills, the divisor is the
number of steps elapsed so early estimates are not biased low.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

TRANSITION_WINDOW = 1000  # history capacity, also the transition-estimation window
FREQUENCY_WINDOW = 100  # sliding window for visitation-frequency estimates


class NonMonotonicStep(ValueError):
    pass


@dataclass
class VisitationHistory:
    """Bounded per-step record of (step, node) visits for one agent."""

    agent: int
    capacity: int = TRANSITION_WINDOW
    entries: deque = field(default_factory=deque)

    def __post_init__(self):
        self.entries = deque(self.entries, maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def last_step(self) -> int | None:
        return self.entries[-1][0] if self.entries else None

    def recent(self, count: int) -> list[tuple[int, int]]:
        """The most recent `count` (step, node) entries, oldest first."""
        if count >= len(self.entries):
            return list(self.entries)
        return [self.entries[i] for i in range(len(self.entries) - count, len(self.entries))]


@dataclass(frozen=True)
class FrequencyEstimate:
    node: int
    value: float  # percent of per-agent capacity


def record_visit(h: VisitationHistory, step: int, node: int) -> VisitationHistory:
    """Append one visit; steps must advance by exactly one per call."""
    last = h.last_step
    if last is not None and step != last + 1:
        raise NonMonotonicStep(f"step {step} after {last}; expected {last + 1}")
    h.entries.append((step, node))
    return h


def window_size(h: VisitationHistory, now: int, window: int = FREQUENCY_WINDOW) -> int:
    """Effective divisor: `window` once warm, else the number of steps elapsed."""
    if not h.entries:
        return window
    first_step = h.entries[0][0]
    return min(window, now - first_step + 1)


def windowed_frequency(
    h: VisitationHistory, node: int, now: int, window: int = FREQUENCY_WINDOW
) -> float:
    """Percent of the recent window in which `node` was visited by this agent."""
    if not h.entries:
        return 0.0
    lo = now - window
    count = sum(1 for step, visited in h.entries if lo < step <= now and visited == node)
    return 100.0 * count / window_size(h, now, window)


def frequency_table(h: VisitationHistory, now: int, window: int = FREQUENCY_WINDOW):
    """FrequencyEstimate for every node seen in the window."""
    lo = now - window
    counts: dict[int, int] = {}
    for step, node in h.entries:
        if lo < step <= now:
            counts[node] = counts.get(node, 0) + 1
    div = window_size(h, now, window)
    return [FrequencyEstimate(node, 100.0 * c / div) for node, c in sorted(counts.items())]


def estimated_frequency(view, node: int, now: int) -> float:
    """Team visitation frequency of `node` as one agent estimates it.

    Combines the agent's own windowed frequency with the expected visit mass
    it attributes to each peer (exact where exchanged history covers a step,
    belief-propagated probability mass otherwise). `view` is an AgentView.
    """
    return view.estimate_node(node)
