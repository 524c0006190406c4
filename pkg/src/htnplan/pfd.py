"""Partially ordered forward decomposition.

Differs from the totally ordered engine in branching over predecessor-free
tasks of a partially ordered network instead of a sequence head, and in
keeping every network transitively closed (Warshall) so that a cyclic
decomposition is witnessed by a diagonal entry and discarded.
"""

from __future__ import annotations

import heapq
from typing import IO

from .grounding import GroundProblem, applicable, apply
from .network import TaskNetwork, decompose, has_cycle
from .search import (
    ActionEvent,
    DecomposeEvent,
    SearchLimits,
    SearchNode,
    SearchResult,
    SearchStatus,
    Ticker,
    assemble_plan,
)


class PartialOrderNode(SearchNode):
    __slots__ = ("network",)

    def __init__(self, state, network, parent=None, event=None, non_decomposed=0,
                 action_count=0, next_instance=0):
        super().__init__(state, parent, event, non_decomposed, action_count, next_instance)
        self.network = network


def expand_free_primitive(
    problem: GroundProblem, node: PartialOrderNode, index: int
) -> list[PartialOrderNode]:
    """Execute a predecessor-free primitive task: same contract as the
    totally ordered expansion, except the task leaves the network by index."""
    inst, sig = node.network.tasks[index]
    out = []
    for aid in problem.relevant_actions.get(sig, ()):
        action = problem.actions[aid]
        if applicable(action, node.state):
            out.append(
                PartialOrderNode(
                    state=apply(node.state, action),
                    network=node.network.remove_task(index),
                    parent=node,
                    event=ActionEvent(inst, aid),
                    non_decomposed=node.non_decomposed,
                    action_count=node.action_count + 1,
                    next_instance=node.next_instance,
                )
            )
    return out


def expand_free_compound(
    problem: GroundProblem, node: PartialOrderNode, index: int
) -> list[PartialOrderNode]:
    """Decompose a predecessor-free compound task with every relevant
    applicable method; decompositions that close into a cycle are dropped."""
    inst, sig = node.network.tasks[index]
    out = []
    for mid in problem.relevant_methods.get(sig, ()):
        method = problem.methods[mid]
        if not applicable(method, node.state):
            continue
        network, children = decompose(
            node.network, index, method.subtasks, method.ordering, node.next_instance
        )
        if network is None:  # cyclic: discard the decomposition, not the node
            continue
        out.append(
            PartialOrderNode(
                state=node.state,
                network=network,
                parent=node,
                event=DecomposeEvent(inst, sig, mid, tuple(c.instance for c in children)),
                non_decomposed=node.non_decomposed - 1 + method.compound_count,
                action_count=node.action_count,
                next_instance=node.next_instance + len(children),
            )
        )
    return out


def pfd_solve(
    problem: GroundProblem,
    limits: SearchLimits | None = None,
    duplicate_detection: bool = True,
    first_free_only: bool = False,
    trace: IO | None = None,
) -> SearchResult:
    limits = limits or SearchLimits()
    ticker = Ticker(limits)

    if problem.network_cyclic:
        return SearchResult(
            SearchStatus.UNSOLVABLE, reason="initial network ordering is cyclic",
            duration=ticker.elapsed,
        )

    root = PartialOrderNode(
        state=problem.s0,
        network=problem.network,
        non_decomposed=sum(
            1 for t in problem.network.tasks if not problem.sigs[t.sig].primitive
        ),
        next_instance=len(problem.network.tasks),
    )
    roots = tuple(t.instance for t in problem.network.tasks)

    counter = 0
    heap = [(root.priority(), root)]
    seen = {(root.state, root.network.canonical_key())}

    while heap:
        limit = ticker.over_budget()
        if limit:
            return SearchResult(
                SearchStatus.EXHAUSTED, reason=limit,
                expanded=ticker.expanded, generated=ticker.generated,
                duration=ticker.elapsed,
            )
        _, node = heapq.heappop(heap)
        if node.network.is_empty:
            return SearchResult(
                SearchStatus.SOLVED, plan=assemble_plan(node, roots),
                expanded=ticker.expanded, generated=ticker.generated,
                duration=ticker.elapsed,
            )
        ticker.expanded += 1
        free = node.network.free_tasks()
        if first_free_only:
            free = free[:1]
        successors = []
        for index in free:
            sig = problem.sigs[node.network.tasks[index].sig]
            if sig.primitive:
                successors.extend(expand_free_primitive(problem, node, index))
            else:
                successors.extend(expand_free_compound(problem, node, index))
        if trace is not None:
            names = ",".join(
                problem.sig_str(node.network.tasks[i].sig) for i in free
            )
            trace.write(
                f"expand {node.seq} free=[{names}] branches={len(successors)}\n"
            )
        for succ in successors:
            if duplicate_detection:
                key = (succ.state, succ.network.canonical_key())
                if key in seen:
                    continue
                seen.add(key)
            counter += 1
            succ.seq = counter
            ticker.generated += 1
            heapq.heappush(heap, (succ.priority(), succ))

    return SearchResult(
        SearchStatus.UNSOLVABLE, reason="frontier exhausted",
        expanded=ticker.expanded, generated=ticker.generated,
        duration=ticker.elapsed,
    )
