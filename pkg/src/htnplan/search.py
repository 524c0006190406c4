"""Shared search machinery for the two decomposition engines.

Node selection realises the deterministic strategy: prefer the frontier
node with the fewest non-decomposed (compound) tasks, break ties by the
fewest actions in the plan prefix, then by insertion order (FIFO).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable


@dataclass(frozen=True)
class SearchLimits:
    timeout: float | None = 300.0
    max_nodes: int | None = None


class SearchStatus(Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class ActionEvent:
    """A primitive task instance executed by a ground action."""

    instance: int
    action: int


@dataclass(frozen=True)
class DecomposeEvent:
    """A compound task instance rewritten by a method application."""

    instance: int
    sig: int
    method: int
    children: tuple[int, ...]


PlanEvent = ActionEvent | DecomposeEvent


@dataclass(frozen=True)
class Plan:
    """Action sequence plus the decomposition record that produced it."""

    actions: tuple[tuple[int, int], ...]  # (instance id, ground action id)
    events: tuple[PlanEvent, ...]
    roots: tuple[int, ...]

    @property
    def action_ids(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.actions)

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class SearchResult:
    status: SearchStatus
    plan: Plan | None = None
    reason: str | None = None  # which limit fired, or why unsolvable
    expanded: int = 0
    generated: int = 0
    duration: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status is SearchStatus.SOLVED


class SearchNode:
    """Common node bookkeeping; engines subclass with their task container."""

    __slots__ = (
        "state",
        "parent",
        "event",
        "non_decomposed",
        "action_count",
        "next_instance",
        "seq",
    )

    def __init__(self, state, parent, event, non_decomposed, action_count, next_instance):
        self.state = state
        self.parent = parent
        self.event = event
        self.non_decomposed = non_decomposed
        self.action_count = action_count
        self.next_instance = next_instance
        self.seq = 0  # insertion sequence, assigned when pushed

    def priority(self) -> tuple[int, int, int]:
        return (self.non_decomposed, self.action_count, self.seq)

    def events(self) -> list:
        chain = []
        node = self
        while node.parent is not None:
            chain.append(node.event)
            node = node.parent
        chain.reverse()
        return chain


def select_node(frontier: Iterable[SearchNode]) -> SearchNode:
    """The node with the fewest non-decomposed tasks; ties fall to the
    fewest actions, then to the earliest insertion."""
    return min(frontier, key=SearchNode.priority)


def assemble_plan(node: SearchNode, roots: tuple[int, ...]) -> Plan:
    events = node.events()
    actions = tuple(
        (e.instance, e.action) for e in events if isinstance(e, ActionEvent)
    )
    return Plan(actions=actions, events=tuple(events), roots=roots)


class Ticker:
    """Wall-clock and node budget tracking for one solve call."""

    def __init__(self, limits: SearchLimits):
        self.limits = limits
        self.started = time.monotonic()
        self.expanded = 0
        self.generated = 0

    def over_budget(self) -> str | None:
        if self.limits.max_nodes is not None and self.expanded >= self.limits.max_nodes:
            return "max_nodes"
        if (
            self.limits.timeout is not None
            and time.monotonic() - self.started > self.limits.timeout
        ):
            return "timeout"
        return None

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started
