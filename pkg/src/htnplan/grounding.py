"""Compact grounding pipeline.

Instantiates actions over inferred parameter domains, filters them through a
delete-relaxation reachability fixpoint, instantiates methods top-down from
the initial task network with task-reachability pruning, and finally encodes
everything into bitmask form over the surviving fact universe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .model import (
    Atom,
    IndexedModel,
    Inertia,
    SymbolTable,
    is_param,
    param_index,
)
from .network import TaskNetwork, close_rows, has_cycle, initial_network, rows_from_pairs

log = logging.getLogger(__name__)

_NEVER_DELETED = (Inertia.NEGATIVE, Inertia.FULL)


class TaskSig(NamedTuple):
    """A fully ground task signature."""

    primitive: bool
    name: int          # action name id when primitive, compound task id otherwise
    args: tuple[int, ...]


@dataclass(frozen=True)
class Fact:
    id: int
    predicate: int
    args: tuple[int, ...]


@dataclass(frozen=True)
class ActionCandidate:
    name_id: int
    args: tuple[int, ...]
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    eff_add: frozenset[Atom]
    eff_del: frozenset[Atom]

    @property
    def sig(self) -> TaskSig:
        return TaskSig(True, self.name_id, self.args)


@dataclass(frozen=True)
class MethodCandidate:
    name_id: int
    args: tuple[int, ...]
    task: TaskSig
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    subtasks: tuple[TaskSig, ...]
    ordering: tuple[tuple[int, int], ...]
    totally_ordered: bool


@dataclass(frozen=True)
class GroundAction:
    id: int
    sig_id: int
    name_id: int
    args: tuple[int, ...]
    pre_pos: int
    pre_neg: int
    eff_add: int
    eff_del: int
    pre_pos_atoms: frozenset[Atom]
    pre_neg_atoms: frozenset[Atom]
    eff_add_atoms: frozenset[Atom]
    eff_del_atoms: frozenset[Atom]


@dataclass(frozen=True)
class GroundMethod:
    id: int
    sig_id: int              # the compound task this method decomposes
    name_id: int
    args: tuple[int, ...]
    pre_pos: int
    pre_neg: int
    pre_pos_atoms: frozenset[Atom]
    pre_neg_atoms: frozenset[Atom]
    subtasks: tuple[int, ...]                 # sig ids, declaration order
    ordering: tuple[tuple[int, int], ...]     # irreflexive position pairs
    totally_ordered: bool
    chain: tuple[int, ...] | None             # subtask sig ids in execution order
    compound_count: int


@dataclass(frozen=True)
class GroundingFailure:
    """Initial-network tasks left without any relevant action or method.

    Reported, not raised: the problem is trivially unsolvable and the
    searches will answer Unsolvable on their own.
    """

    doomed: tuple[TaskSig, ...]
    message: str


@dataclass
class GroundStats:
    lifted_actions: int = 0
    lifted_methods: int = 0
    naive_actions: int = 0
    naive_methods: int = 0
    naive_facts: int = 0
    action_candidates: int = 0
    actions_reachable: int = 0
    methods_instantiated: int = 0
    methods_surviving: int = 0
    facts_reachable: int = 0
    facts_total: int = 0

    def lines(self) -> list[str]:
        return [
            f"actions: lifted {self.lifted_actions}, naive product {self.naive_actions}, "
            f"candidates {self.action_candidates}, reachable {self.actions_reachable}",
            f"methods: lifted {self.lifted_methods}, naive product {self.naive_methods}, "
            f"instantiated {self.methods_instantiated}, surviving {self.methods_surviving}",
            f"facts: naive {self.naive_facts}, reachable {self.facts_reachable}, "
            f"universe {self.facts_total}",
        ]


@dataclass
class GroundProblem:
    symbols: SymbolTable
    facts: tuple[Fact, ...]
    fact_index: dict[Atom, int]
    s0: int
    s0_atoms: frozenset[Atom]
    actions: tuple[GroundAction, ...]
    methods: tuple[GroundMethod, ...]
    sigs: tuple[TaskSig, ...]
    sig_index: dict[TaskSig, int]
    relevant_actions: dict[int, tuple[int, ...]]
    relevant_methods: dict[int, tuple[int, ...]]
    network: TaskNetwork
    network_cyclic: bool
    failure: GroundingFailure | None

    @property
    def fact_count(self) -> int:
        return len(self.facts)

    def fact_str(self, fid: int) -> str:
        f = self.facts[fid]
        return self.symbols.decode_atom((f.predicate, f.args))

    def sig_str(self, sig_id: int) -> str:
        s = self.sigs[sig_id]
        return self.symbols.decode_task(s.primitive, s.name, s.args)

    def action_str(self, aid: int) -> str:
        a = self.actions[aid]
        return self.symbols.decode_task(True, a.name_id, a.args)

    def method_name(self, mid: int) -> str:
        return self.symbols.method_names[self.methods[mid].name_id]


# ---------------------------------------------------------------------------
# Bit-level state transition contract
# ---------------------------------------------------------------------------

def applicable(op: GroundAction | GroundMethod, state: int) -> bool:
    """True iff every positive precondition bit is set and no negative one is."""
    return (state & op.pre_pos) == op.pre_pos and (state & op.pre_neg) == 0


def apply(state: int, action: GroundAction) -> int:
    """The transition function: (state minus deletes) union adds."""
    return (state & ~action.eff_del) | action.eff_add


# ---------------------------------------------------------------------------
# Binding enumeration shared by step 3 and step 5
# ---------------------------------------------------------------------------

def _ground_atom(atom: Atom, binding: list[int]) -> Atom:
    pred, args = atom
    return pred, tuple(binding[param_index(a)] if is_param(a) else a for a in args)


def _max_depth(args: tuple[int, ...]) -> int:
    depths = [param_index(a) for a in args if is_param(a)]
    return max(depths) if depths else -1


def _enumerate_bindings(
    op,
    init: frozenset[Atom],
    inertia: list[Inertia],
    preset: dict[int, int] | None = None,
) -> Iterator[tuple[int, ...]]:
    """Yield parameter bindings over the operator's restricted domains,
    pruning any branch that violates a static literal or an `=` constraint."""
    arity = len(op.param_types)
    preset = preset or {}
    for idx, val in preset.items():
        if val not in op.param_domains[idx]:
            return

    static_pos: list[list[Atom]] = [[] for _ in range(arity + 1)]
    static_neg: list[list[Atom]] = [[] for _ in range(arity + 1)]
    for atom in op.pre_pos:
        if inertia[atom[0]] is Inertia.FULL:
            static_pos[_max_depth(atom[1]) + 1].append(atom)
    for atom in op.pre_neg:
        if inertia[atom[0]] is Inertia.FULL:
            static_neg[_max_depth(atom[1]) + 1].append(atom)
    eq_pos: list[list[tuple[int, int]]] = [[] for _ in range(arity + 1)]
    eq_neg: list[list[tuple[int, int]]] = [[] for _ in range(arity + 1)]
    for pair in op.eq_pos:
        eq_pos[_max_depth(pair) + 1].append(pair)
    for pair in op.eq_neg:
        eq_neg[_max_depth(pair) + 1].append(pair)

    binding: list[int] = [-1] * arity

    def value(term: int) -> int:
        return binding[param_index(term)] if is_param(term) else term

    def consistent(depth: int) -> bool:
        for atom in static_pos[depth + 1]:
            if _ground_atom(atom, binding) not in init:
                return False
        for atom in static_neg[depth + 1]:
            if _ground_atom(atom, binding) in init:
                return False
        for left, right in eq_pos[depth + 1]:
            if value(left) != value(right):
                return False
        for left, right in eq_neg[depth + 1]:
            if value(left) == value(right):
                return False
        return True

    def recurse(depth: int) -> Iterator[tuple[int, ...]]:
        if depth == arity:
            yield tuple(binding)
            return
        if depth in preset:
            binding[depth] = preset[depth]
            if consistent(depth):
                yield from recurse(depth + 1)
            return
        for obj in sorted(op.param_domains[depth]):
            binding[depth] = obj
            if consistent(depth):
                yield from recurse(depth + 1)

    if arity == 0:
        if consistent(-1):
            yield ()
        return
    if consistent(-1):
        yield from recurse(0)


def _runtime_atoms(atoms, binding, inertia) -> frozenset[Atom]:
    """Ground the non-static literals; static ones were checked and folded."""
    return frozenset(
        _ground_atom(a, list(binding))
        for a in atoms
        if inertia[a[0]] is not Inertia.FULL
    )


# ---------------------------------------------------------------------------
# Step 3: action instantiation
# ---------------------------------------------------------------------------

def instantiate_actions(
    model: IndexedModel, inertia: list[Inertia]
) -> list[ActionCandidate]:
    out: list[ActionCandidate] = []
    for action in model.actions:
        if action.uninstantiable:
            continue
        for binding in _enumerate_bindings(action, model.init, inertia):
            b = list(binding)
            eff_add = frozenset(_ground_atom(a, b) for a in action.eff_add)
            eff_del = frozenset(_ground_atom(a, b) for a in action.eff_del)
            if eff_add & eff_del:
                log.warning(
                    "dropping %s: contradictory effects on %s",
                    model.symbols.decode_task(True, action.name_id, binding),
                    ", ".join(sorted(model.symbols.decode_atom(a) for a in eff_add & eff_del)),
                )
                continue
            pre_pos = _runtime_atoms(action.pre_pos, binding, inertia)
            pre_neg = _runtime_atoms(action.pre_neg, binding, inertia)
            if pre_pos & pre_neg:
                continue  # unsatisfiable precondition
            out.append(
                ActionCandidate(
                    name_id=action.name_id,
                    args=binding,
                    pre_pos=pre_pos,
                    pre_neg=pre_neg,
                    eff_add=eff_add,
                    eff_del=eff_del,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Step 4: delete-relaxation reachability
# ---------------------------------------------------------------------------

def _neg_contradicted(pre_neg, init: frozenset[Atom], inertia: list[Inertia]) -> bool:
    """A negative literal can never hold when its atom is true in init and its
    predicate is never deleted."""
    return any(
        inertia[pred] in _NEVER_DELETED and (pred, args) in init
        for pred, args in pre_neg
    )


def reachability_filter(
    candidates: list[ActionCandidate],
    init: frozenset[Atom],
    inertia: list[Inertia],
) -> tuple[set[Atom], list[ActionCandidate]]:
    """Fixpoint of relaxed applicability; returns the reachable atom set and
    the candidates applicable at the fixpoint, in candidate order."""
    remaining = [
        c for c in candidates if not _neg_contradicted(c.pre_neg, init, inertia)
    ]
    reachable: set[Atom] = set(init)
    survivors: dict[int, ActionCandidate] = {}
    changed = True
    while changed:
        changed = False
        still = []
        for c in remaining:
            if c.pre_pos <= reachable:
                survivors[id(c)] = c
                if not c.eff_add <= reachable:
                    reachable |= c.eff_add
                changed = True
            else:
                still.append(c)
        remaining = still
    ordered = [c for c in candidates if id(c) in survivors]
    return reachable, ordered


# ---------------------------------------------------------------------------
# Step 5: method instantiation with task-reachability pruning
# ---------------------------------------------------------------------------

def _unify_task(task_args: tuple[int, ...], ground_args: tuple[int, ...]) -> dict[int, int] | None:
    preset: dict[int, int] = {}
    for term, value in zip(task_args, ground_args):
        if is_param(term):
            idx = param_index(term)
            if preset.get(idx, value) != value:
                return None
            preset[idx] = value
        elif term != value:
            return None
    return preset


def instantiate_methods(
    model: IndexedModel,
    inertia: list[Inertia],
    actions: list[ActionCandidate],
    reachable: set[Atom],
) -> tuple[list[MethodCandidate], dict[TaskSig, list[int]], list[TaskSig], int]:
    """Ground methods top-down from the initial network, then prune to a
    fixpoint every task without relevant actions or methods and every method
    containing such a task.  Returns (surviving methods, relevance, doomed
    initial tasks, instantiated-count-before-pruning)."""
    action_sigs = {c.sig for c in actions}
    by_task: dict[int, list] = {}
    for m in model.methods:
        if not m.uninstantiable:
            by_task.setdefault(m.task_name, []).append(m)

    cands: list[MethodCandidate] = []
    cands_for: dict[TaskSig, list[int]] = {}
    visited: set[TaskSig] = set()
    queue = [t for t in _network_sigs(model) if not t.primitive]

    while queue:
        sig = queue.pop()
        if sig in visited:
            continue
        visited.add(sig)
        cands_for.setdefault(sig, [])
        for m in by_task.get(sig.name, []):
            preset = _unify_task(m.task_args, sig.args)
            if preset is None:
                continue
            for binding in _enumerate_bindings(m, model.init, inertia, preset):
                b = list(binding)
                pre_pos = _runtime_atoms(m.pre_pos, binding, inertia)
                pre_neg = _runtime_atoms(m.pre_neg, binding, inertia)
                if not pre_pos <= reachable:
                    continue  # a positive precondition can never become true
                if _neg_contradicted(pre_neg, model.init, inertia):
                    continue
                if pre_pos & pre_neg:
                    continue
                subtasks = tuple(
                    TaskSig(prim, name, tuple(b[param_index(a)] if is_param(a) else a for a in args))
                    for prim, name, args in m.subtasks
                )
                if any(t.primitive and t not in action_sigs for t in subtasks):
                    continue  # contains an unreachable primitive task
                cand = MethodCandidate(
                    name_id=m.name_id,
                    args=binding,
                    task=sig,
                    pre_pos=pre_pos,
                    pre_neg=pre_neg,
                    subtasks=subtasks,
                    ordering=m.ordering,
                    totally_ordered=m.totally_ordered,
                )
                cands_for[sig].append(len(cands))
                cands.append(cand)
                queue.extend(t for t in subtasks if not t.primitive and t not in visited)

    instantiated = len(cands)

    # prune to fixpoint: methods die with their dead compound subtasks,
    # compound tasks die with their last method
    alive = [True] * len(cands)
    changed = True
    while changed:
        changed = False
        task_ok = {
            sig: any(alive[i] for i in ids) for sig, ids in cands_for.items()
        }
        for i, cand in enumerate(cands):
            if alive[i] and not all(
                task_ok.get(t, False) for t in cand.subtasks if not t.primitive
            ):
                alive[i] = False
                changed = True

    surviving = [c for i, c in enumerate(cands) if alive[i]]
    relevance: dict[TaskSig, list[int]] = {}
    for idx, cand in enumerate(surviving):
        relevance.setdefault(cand.task, []).append(idx)

    doomed = []
    for sig in _network_sigs(model):
        if sig.primitive:
            if sig not in action_sigs:
                doomed.append(sig)
        elif not relevance.get(sig):
            doomed.append(sig)
    return surviving, relevance, doomed, instantiated


def _network_sigs(model: IndexedModel) -> list[TaskSig]:
    return [TaskSig(prim, name, args) for prim, name, args in model.network_tasks]


# ---------------------------------------------------------------------------
# Step 6: bitset encoding
# ---------------------------------------------------------------------------

def _mask(atoms: frozenset[Atom], fact_index: dict[Atom, int]) -> int:
    mask = 0
    for atom in atoms:
        mask |= 1 << fact_index[atom]
    return mask


def _method_chain(
    subtask_ids: tuple[int, ...], ordering: tuple[tuple[int, int], ...]
) -> tuple[int, ...] | None:
    """Execution order of the subtasks when the ordering is a total chain."""
    n = len(subtask_ids)
    rows = close_rows(rows_from_pairs(ordering, n), n)
    if has_cycle(rows):
        return None
    for i in range(n):
        for j in range(i + 1, n):
            if not (rows[i] >> j & 1 or rows[j] >> i & 1):
                return None
    order = sorted(range(n), key=lambda i: (-bin(rows[i]).count("1"), i))
    return tuple(subtask_ids[i] for i in order)


def encode_bitsets(
    model: IndexedModel,
    reachable: set[Atom],
    actions: list[ActionCandidate],
    methods: list[MethodCandidate],
    relevance: dict[TaskSig, list[int]],
    doomed: list[TaskSig],
) -> GroundProblem:
    universe = set(reachable)
    for c in actions:
        universe |= c.pre_neg
    for m in methods:
        universe |= m.pre_neg
    atoms = sorted(universe)
    fact_index = {atom: i for i, atom in enumerate(atoms)}
    facts = tuple(Fact(i, pred, args) for i, (pred, args) in enumerate(atoms))

    sigs: list[TaskSig] = []
    sig_index: dict[TaskSig, int] = {}

    def intern(sig: TaskSig) -> int:
        if sig not in sig_index:
            sig_index[sig] = len(sigs)
            sigs.append(sig)
        return sig_index[sig]

    ground_actions = []
    for aid, c in enumerate(actions):
        ground_actions.append(
            GroundAction(
                id=aid,
                sig_id=intern(c.sig),
                name_id=c.name_id,
                args=c.args,
                pre_pos=_mask(c.pre_pos, fact_index),
                pre_neg=_mask(c.pre_neg, fact_index),
                eff_add=_mask(c.eff_add, fact_index),
                eff_del=_mask(c.eff_del, fact_index),
                pre_pos_atoms=c.pre_pos,
                pre_neg_atoms=c.pre_neg,
                eff_add_atoms=c.eff_add,
                eff_del_atoms=c.eff_del,
            )
        )

    ground_methods = []
    for mid, m in enumerate(methods):
        subtask_ids = tuple(intern(t) for t in m.subtasks)
        ground_methods.append(
            GroundMethod(
                id=mid,
                sig_id=intern(m.task),
                name_id=m.name_id,
                args=m.args,
                pre_pos=_mask(m.pre_pos, fact_index),
                pre_neg=_mask(m.pre_neg, fact_index),
                pre_pos_atoms=m.pre_pos,
                pre_neg_atoms=m.pre_neg,
                subtasks=subtask_ids,
                ordering=m.ordering,
                totally_ordered=m.totally_ordered,
                chain=_method_chain(subtask_ids, m.ordering),
                compound_count=sum(1 for t in m.subtasks if not t.primitive),
            )
        )

    relevant_actions: dict[int, list[int]] = {}
    for a in ground_actions:
        relevant_actions.setdefault(a.sig_id, []).append(a.id)
    relevant_methods = {
        intern(sig): [mid for mid in ids] for sig, ids in relevance.items()
    }

    network_sig_ids = [intern(t) for t in _network_sigs(model)]
    network = initial_network(network_sig_ids, model.network_ordering)

    failure = None
    if doomed:
        names = ", ".join(
            model.symbols.decode_task(s.primitive, s.name, s.args) for s in doomed
        )
        failure = GroundingFailure(
            doomed=tuple(doomed),
            message=f"initial network tasks without any relevant action or method: {names}",
        )
        log.warning("%s", failure.message)

    return GroundProblem(
        symbols=model.symbols,
        facts=facts,
        fact_index=fact_index,
        s0=_mask(model.init, fact_index),
        s0_atoms=model.init,
        actions=tuple(ground_actions),
        methods=tuple(ground_methods),
        sigs=tuple(sigs),
        sig_index=sig_index,
        relevant_actions={k: tuple(v) for k, v in relevant_actions.items()},
        relevant_methods={k: tuple(sorted(v)) for k, v in relevant_methods.items()},
        network=network,
        network_cyclic=has_cycle(network.before),
        failure=failure,
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def ground(model: IndexedModel, inertia: list[Inertia]) -> tuple[GroundProblem, GroundStats]:
    """Run steps 3-6 on an encoded, simplified model."""
    stats = GroundStats()
    sym = model.symbols
    stats.lifted_actions = len(model.actions)
    stats.lifted_methods = len(model.methods)
    for a in model.actions:
        count = 1
        for t in a.param_types:
            count *= len(sym.type_members[t])
        stats.naive_actions += count
    for m in model.methods:
        count = 1
        for t in m.param_types:
            count *= len(sym.type_members[t])
        stats.naive_methods += count
    for types in sym.predicate_types:
        count = 1
        for t in types:
            count *= len(sym.type_members[t])
        stats.naive_facts += count

    candidates = instantiate_actions(model, inertia)
    stats.action_candidates = len(candidates)
    reachable, survivors = reachability_filter(candidates, model.init, inertia)
    stats.actions_reachable = len(survivors)
    stats.facts_reachable = len(reachable)
    methods, relevance, doomed, instantiated = instantiate_methods(
        model, inertia, survivors, reachable
    )
    stats.methods_instantiated = instantiated
    stats.methods_surviving = len(methods)
    problem = encode_bitsets(model, reachable, survivors, methods, relevance, doomed)
    stats.facts_total = problem.fact_count
    return problem, stats


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------

def _bits(mask: int) -> str:
    ids = [str(i) for i in range(mask.bit_length()) if mask >> i & 1]
    return "{" + ",".join(ids) + "}"


def dump_ground(problem: GroundProblem) -> str:
    out = ["facts:"]
    for f in problem.facts:
        out.append(f"  {f.id}: {problem.fact_str(f.id)}")
    out.append(f"init: {_bits(problem.s0)}")
    out.append("actions:")
    for a in problem.actions:
        out.append(
            f"  {a.id}: {problem.action_str(a.id)} pre+{_bits(a.pre_pos)} "
            f"pre-{_bits(a.pre_neg)} add{_bits(a.eff_add)} del{_bits(a.eff_del)}"
        )
    out.append("methods:")
    for m in problem.methods:
        subs = " ".join(problem.sig_str(s) for s in m.subtasks) or "-"
        out.append(
            f"  {m.id}: {problem.method_name(m.id)} task={problem.sig_str(m.sig_id)} "
            f"pre+{_bits(m.pre_pos)} pre-{_bits(m.pre_neg)} subtasks[{subs}] "
            f"ordering{sorted(m.ordering)}"
        )
    out.append("network:")
    for inst, sig in problem.network.tasks:
        out.append(f"  {inst}: {problem.sig_str(sig)}")
    out.append(f"network ordering: {sorted(problem.network.pairs())}")
    if problem.failure:
        out.append(f"warning: {problem.failure.message}")
    return "\n".join(out) + "\n"
