"""Totally ordered forward decomposition.

Explores the choice points of the recursive non-deterministic procedure
with an explicit best-first frontier: the head of the task sequence is
either a primitive task, replaced by each relevant applicable action, or
a compound task, replaced by each relevant applicable method's subtasks
prepended to the remaining sequence.
"""

from __future__ import annotations

import heapq
from typing import IO

from .errors import NotTotallyOrdered
from .grounding import GroundProblem, applicable, apply
from .network import TaskInstance
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


class TotalOrderNode(SearchNode):
    __slots__ = ("tasks",)

    def __init__(self, state, tasks, parent=None, event=None, non_decomposed=0,
                 action_count=0, next_instance=0):
        super().__init__(state, parent, event, non_decomposed, action_count, next_instance)
        self.tasks = tasks  # tuple of TaskInstance, execution order


def check_totally_ordered(problem: GroundProblem) -> None:
    """TFD input gate: the initial network and every surviving method must
    impose a strict chain on their tasks."""
    if not problem.network.is_total_order():
        raise NotTotallyOrdered(
            "initial task network is partially ordered; use --search pfd"
        )
    for m in problem.methods:
        if m.chain is None:
            raise NotTotallyOrdered(
                f"method {problem.method_name(m.id)} for {problem.sig_str(m.sig_id)} "
                "is partially ordered; use --search pfd"
            )


def expand_primitive(problem: GroundProblem, node: TotalOrderNode) -> list[TotalOrderNode]:
    """One successor per relevant action applicable in the node's state;
    an empty result is this node's dead end."""
    inst, sig = node.tasks[0]
    rest = node.tasks[1:]
    out = []
    for aid in problem.relevant_actions.get(sig, ()):
        action = problem.actions[aid]
        if applicable(action, node.state):
            out.append(
                TotalOrderNode(
                    state=apply(node.state, action),
                    tasks=rest,
                    parent=node,
                    event=ActionEvent(inst, aid),
                    non_decomposed=node.non_decomposed,
                    action_count=node.action_count + 1,
                    next_instance=node.next_instance,
                )
            )
    return out


def expand_compound(problem: GroundProblem, node: TotalOrderNode) -> list[TotalOrderNode]:
    """One successor per relevant applicable method; the method's subtasks
    are prepended, in chain order, to the remaining sequence."""
    inst, sig = node.tasks[0]
    rest = node.tasks[1:]
    out = []
    for mid in problem.relevant_methods.get(sig, ()):
        method = problem.methods[mid]
        if not applicable(method, node.state):
            continue
        chain = method.chain if method.chain is not None else method.subtasks
        children = tuple(
            TaskInstance(node.next_instance + k, s) for k, s in enumerate(chain)
        )
        out.append(
            TotalOrderNode(
                state=node.state,
                tasks=children + rest,
                parent=node,
                event=DecomposeEvent(inst, sig, mid, tuple(c.instance for c in children)),
                non_decomposed=node.non_decomposed - 1 + method.compound_count,
                action_count=node.action_count,
                next_instance=node.next_instance + len(children),
            )
        )
    return out


def tfd_solve(
    problem: GroundProblem,
    limits: SearchLimits | None = None,
    duplicate_detection: bool = True,
    trace: IO | None = None,
) -> SearchResult:
    limits = limits or SearchLimits()
    check_totally_ordered(problem)
    ticker = Ticker(limits)

    order = problem.network.linearize()
    root_tasks = tuple(problem.network.tasks[i] for i in order)
    root = TotalOrderNode(
        state=problem.s0,
        tasks=root_tasks,
        non_decomposed=sum(1 for t in root_tasks if not problem.sigs[t.sig].primitive),
        next_instance=len(root_tasks),
    )
    roots = tuple(t.instance for t in problem.network.tasks)

    counter = 0
    heap = [(root.priority(), root)]
    seen = {(root.state, tuple(t.sig for t in root.tasks))}

    while heap:
        limit = ticker.over_budget()
        if limit:
            return SearchResult(
                SearchStatus.EXHAUSTED, reason=limit,
                expanded=ticker.expanded, generated=ticker.generated,
                duration=ticker.elapsed,
            )
        _, node = heapq.heappop(heap)
        if not node.tasks:  # empty task list: the plan prefix is the answer
            return SearchResult(
                SearchStatus.SOLVED, plan=assemble_plan(node, roots),
                expanded=ticker.expanded, generated=ticker.generated,
                duration=ticker.elapsed,
            )
        ticker.expanded += 1
        sig = problem.sigs[node.tasks[0].sig]
        successors = (
            expand_primitive(problem, node)
            if sig.primitive
            else expand_compound(problem, node)
        )
        if trace is not None:
            trace.write(
                f"expand {node.seq} task={problem.sig_str(node.tasks[0].sig)} "
                f"branches={len(successors)}\n"
            )
        for succ in successors:
            if duplicate_detection:
                key = (succ.state, tuple(t.sig for t in succ.tasks))
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
