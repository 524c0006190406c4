"""Plan serialisation in the IPC hierarchical exchange format, plus an
independent validator.

The validator deliberately avoids the bitmask machinery of the search
modules: it replays plans over explicit atom sets and its own ordering
bookkeeping, so bit-level encoding bugs show up as validation failures.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PlanFormatError
from .grounding import GroundProblem
from .search import ActionEvent, DecomposeEvent, Plan


@dataclass(frozen=True)
class PlanDocument:
    """Parsed form of a hierarchical plan file."""

    actions: tuple[tuple[int, str, tuple[str, ...]], ...]
    roots: tuple[int, ...]
    decompositions: tuple[tuple[int, str, tuple[str, ...], str, tuple[int, ...]], ...]


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None
    step: int | None = None  # 1-based event position of the first violation

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def write_plan(plan: Plan, problem: GroundProblem) -> str:
    """Emit numbered action lines, the `==>` separator, the root declaration,
    and one decomposition line per method application."""
    sym = problem.symbols
    final: dict[int, int] = {}
    for idx, (inst, _aid) in enumerate(plan.actions):
        final[inst] = idx
    next_id = len(plan.actions)
    for event in plan.events:
        if isinstance(event, DecomposeEvent):
            final[event.instance] = next_id
            next_id += 1

    lines = []
    for idx, (_inst, aid) in enumerate(plan.actions):
        action = problem.actions[aid]
        parts = [sym.action_names[action.name_id]]
        parts.extend(sym.object_names[o] for o in action.args)
        lines.append(f"{idx} ({' '.join(parts)})")
    lines.append("==>")
    roots = " ".join(str(final[r]) for r in plan.roots)
    lines.append(f"root {roots}" if roots else "root")
    for event in plan.events:
        if not isinstance(event, DecomposeEvent):
            continue
        sig = problem.sigs[event.sig]
        head = [str(final[event.instance]), sym.compound_names[sig.name]]
        head.extend(sym.object_names[o] for o in sig.args)
        children = " ".join(str(final[c]) for c in event.children)
        line = f"{' '.join(head)} -> {problem.method_name(event.method)}"
        if children:
            line += f" {children}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Parsing (round-trip support)
# ---------------------------------------------------------------------------

_ACTION_RE = re.compile(r"^(\d+) \(([^()]*)\)$")
_DECOMP_RE = re.compile(r"^(\d+) ([^ ]+(?: [^ ]+)*) -> ([^ ]+)((?: \d+)*)$")


def parse_plan(text: str) -> PlanDocument:
    lines = [line for line in text.splitlines() if line.strip()]
    actions = []
    roots: tuple[int, ...] | None = None
    decompositions = []
    section = "actions"
    for line in lines:
        if line == "==>":
            if section != "actions":
                raise PlanFormatError("second '==>' separator")
            section = "hierarchy"
            continue
        if section == "actions":
            match = _ACTION_RE.match(line)
            if not match:
                raise PlanFormatError(f"bad action line: {line!r}")
            words = match.group(2).split()
            if not words:
                raise PlanFormatError(f"empty action in line: {line!r}")
            actions.append((int(match.group(1)), words[0], tuple(words[1:])))
        elif line.startswith("root"):
            if roots is not None:
                raise PlanFormatError("duplicate root line")
            roots = tuple(int(w) for w in line.split()[1:])
        else:
            match = _DECOMP_RE.match(line)
            if not match:
                raise PlanFormatError(f"bad decomposition line: {line!r}")
            head = match.group(2).split()
            decompositions.append(
                (
                    int(match.group(1)),
                    head[0],
                    tuple(head[1:]),
                    match.group(3),
                    tuple(int(w) for w in match.group(4).split()),
                )
            )
    if roots is None:
        raise PlanFormatError("missing root line")

    indices = sorted(i for i, _, _ in actions)
    if indices != list(range(len(actions))):
        raise PlanFormatError("action indices are not contiguous from 0")
    declared = set(indices) | {i for i, *_ in decompositions}
    for i, *_rest, children in decompositions:
        for child in children:
            if child not in declared:
                raise PlanFormatError(f"undeclared child id {child} under {i}")
    for r in roots:
        if r not in declared:
            raise PlanFormatError(f"undeclared root id {r}")
    return PlanDocument(tuple(actions), roots, tuple(decompositions))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _close_pairs(pairs: set[tuple[int, int]]) -> set[tuple[int, int]]:
    closed = set(pairs)
    while True:
        extra = {
            (a, d)
            for a, b in closed
            for c, d in closed
            if b == c and (a, d) not in closed
        }
        if not extra:
            return closed
        closed |= extra


def validate_plan(problem: GroundProblem, plan: Plan) -> ValidationResult:
    """Replay the plan's event record over explicit atom sets.

    Checks executability (each action applicable in the state produced by
    its predecessors), decomposition (each event rewrites a live instance
    with a relevant method whose precondition holds at that point), and the
    ordering constraints inherited through every decomposition.
    """
    sym = problem.symbols

    current: dict[int, int] = {
        inst: sig for inst, sig in problem.network.tasks
    }
    if tuple(sorted(plan.roots)) != tuple(sorted(current)):
        return ValidationResult(False, "root instances do not match the initial network")
    before: set[tuple[int, int]] = set()
    tasks = problem.network.tasks
    for i, row in enumerate(problem.network.before):
        for j in range(len(tasks)):
            if row >> j & 1:
                before.add((tasks[i].instance, tasks[j].instance))

    state = set(problem.s0_atoms)
    executed: list[tuple[int, int]] = []

    for step, event in enumerate(plan.events, start=1):
        if isinstance(event, ActionEvent):
            if event.instance not in current:
                return ValidationResult(False, "action on an absent task instance", step)
            sig = problem.sigs[current[event.instance]]
            action = problem.actions[event.action]
            if not sig.primitive or (action.name_id, action.args) != (sig.name, sig.args):
                return ValidationResult(False, "action does not accomplish its task", step)
            if any(succ == event.instance for _pred, succ in before):
                return ValidationResult(False, "action executed before a predecessor", step)
            if not (set(action.pre_pos_atoms) <= state
                    and not set(action.pre_neg_atoms) & state):
                return ValidationResult(
                    False,
                    f"action {problem.action_str(event.action)} not applicable",
                    step,
                )
            state -= set(action.eff_del_atoms)
            state |= set(action.eff_add_atoms)
            del current[event.instance]
            before = {(a, b) for a, b in before if event.instance not in (a, b)}
            executed.append((event.instance, event.action))
        else:
            if event.instance not in current:
                return ValidationResult(False, "decomposition of an absent instance", step)
            if current[event.instance] != event.sig:
                return ValidationResult(False, "decomposition signature mismatch", step)
            method = problem.methods[event.method]
            if method.sig_id != event.sig:
                return ValidationResult(False, "method not relevant to its task", step)
            if event.method not in problem.relevant_methods.get(event.sig, ()):
                return ValidationResult(False, "method not registered as relevant", step)
            if not (set(method.pre_pos_atoms) <= state
                    and not set(method.pre_neg_atoms) & state):
                return ValidationResult(
                    False,
                    f"method {problem.method_name(event.method)} precondition fails",
                    step,
                )
            if len(event.children) != len(method.subtasks):
                return ValidationResult(False, "wrong number of children", step)
            preds = {a for a, b in before if b == event.instance}
            succs = {b for a, b in before if a == event.instance}
            before = {(a, b) for a, b in before if event.instance not in (a, b)}
            for child, child_sig in zip(event.children, method.subtasks):
                if child in current:
                    return ValidationResult(False, "reused instance id", step)
                current[child] = child_sig
                before |= {(p, child) for p in preds}
                before |= {(child, s) for s in succs}
            for a, b in method.ordering:
                before.add((event.children[a], event.children[b]))
            before = _close_pairs(before)
            if any(a == b for a, b in before):
                return ValidationResult(False, "cyclic ordering after decomposition", step)
            del current[event.instance]

    if current:
        names = ", ".join(sym.decode_task(*problem.sigs[s]) for s in current.values())
        return ValidationResult(False, f"tasks left undone: {names}", len(plan.events))
    if tuple(executed) != plan.actions:
        return ValidationResult(False, "declared actions differ from the replayed ones")
    return ValidationResult(True)
