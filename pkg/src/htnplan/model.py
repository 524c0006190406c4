"""Integer-indexed lifted model.

Interns every symbol into dense 0-based ids (declaration order), classifies
predicate inertia from action effects, narrows parameter domains through
static positive preconditions, and folds ground static literals against the
initial state.  All transformations are pure: they return fresh models.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .hddl import LiftedDomainAst, LiftedProblemAst, ROOT_TYPE

Atom = tuple[int, tuple[int, ...]]  # (predicate id, argument terms)

# Argument/term encoding: >= 0 is an object id, < 0 is parameter index -i - 1.


def param_ref(index: int) -> int:
    return -index - 1


def is_param(term: int) -> bool:
    return term < 0


def param_index(term: int) -> int:
    return -term - 1


class Inertia(Enum):
    FLUENT = "fluent"
    POSITIVE = "positive"  # never added: true only if in init
    NEGATIVE = "negative"  # never deleted: stays true once true
    FULL = "full"          # untouched by effects: truth fixed by init


@dataclass
class SymbolTable:
    """Dense id <-> name maps per category, plus the type hierarchy."""

    type_names: list[str] = field(default_factory=list)
    type_parent: list[int] = field(default_factory=list)
    object_names: list[str] = field(default_factory=list)
    object_type: list[int] = field(default_factory=list)
    predicate_names: list[str] = field(default_factory=list)
    predicate_types: list[tuple[int, ...]] = field(default_factory=list)
    action_names: list[str] = field(default_factory=list)
    compound_names: list[str] = field(default_factory=list)
    method_names: list[str] = field(default_factory=list)

    type_ids: dict[str, int] = field(default_factory=dict)
    object_ids: dict[str, int] = field(default_factory=dict)
    predicate_ids: dict[str, int] = field(default_factory=dict)
    action_ids: dict[str, int] = field(default_factory=dict)
    compound_ids: dict[str, int] = field(default_factory=dict)

    subtypes: list[set[int]] = field(default_factory=list)       # includes the type itself
    type_members: list[frozenset[int]] = field(default_factory=list)

    def add_type(self, name: str, parent: int) -> int:
        tid = len(self.type_names)
        self.type_names.append(name)
        self.type_parent.append(parent)
        self.type_ids[name] = tid
        return tid

    def add_object(self, name: str, type_id: int) -> int:
        oid = len(self.object_names)
        self.object_names.append(name)
        self.object_type.append(type_id)
        self.object_ids[name] = oid
        return oid

    def finalise_hierarchy(self) -> None:
        n = len(self.type_names)
        self.subtypes = [{t} for t in range(n)]
        for t in range(1, n):  # register t with every ancestor (hierarchy is acyclic)
            a = self.type_parent[t]
            while True:
                self.subtypes[a].add(t)
                if a == 0:
                    break
                a = self.type_parent[a]
        members: list[set[int]] = [set() for _ in range(n)]
        for oid, t in enumerate(self.object_type):
            while True:
                members[t].add(oid)
                if t == 0:
                    break
                t = self.type_parent[t]
        self.type_members = [frozenset(m) for m in members]

    def decode_object(self, oid: int) -> str:
        return self.object_names[oid]

    def decode_atom(self, atom: Atom) -> str:
        pred, args = atom
        parts = [self.predicate_names[pred]]
        parts.extend(
            self.object_names[a] if not is_param(a) else f"?{param_index(a)}"
            for a in args
        )
        return "(" + " ".join(parts) + ")"

    def decode_task(self, primitive: bool, name_id: int, args: tuple[int, ...]) -> str:
        name = self.action_names[name_id] if primitive else self.compound_names[name_id]
        parts = [name]
        parts.extend(
            self.object_names[a] if not is_param(a) else f"?{param_index(a)}"
            for a in args
        )
        return "(" + " ".join(parts) + ")"


@dataclass(frozen=True)
class LiftedAction:
    name_id: int
    param_types: tuple[int, ...]
    param_domains: tuple[frozenset[int], ...]
    pre_pos: tuple[Atom, ...]
    pre_neg: tuple[Atom, ...]
    eff_add: tuple[Atom, ...]
    eff_del: tuple[Atom, ...]
    eq_pos: tuple[tuple[int, int], ...] = ()
    eq_neg: tuple[tuple[int, int], ...] = ()
    uninstantiable: bool = False


Subtask = tuple[bool, int, tuple[int, ...]]  # (primitive?, name id, argument terms)


@dataclass(frozen=True)
class LiftedMethod:
    name_id: int
    param_types: tuple[int, ...]
    param_domains: tuple[frozenset[int], ...]
    task_name: int
    task_args: tuple[int, ...]
    pre_pos: tuple[Atom, ...]
    pre_neg: tuple[Atom, ...]
    subtasks: tuple[Subtask, ...]
    ordering: tuple[tuple[int, int], ...]
    totally_ordered: bool
    eq_pos: tuple[tuple[int, int], ...] = ()
    eq_neg: tuple[tuple[int, int], ...] = ()
    uninstantiable: bool = False


@dataclass(frozen=True)
class IndexedModel:
    symbols: SymbolTable
    actions: tuple[LiftedAction, ...]
    methods: tuple[LiftedMethod, ...]
    init: frozenset[Atom]
    network_tasks: tuple[Subtask, ...]           # fully ground (object-id args)
    network_ordering: tuple[tuple[int, int], ...]
    network_totally_ordered: bool


# ---------------------------------------------------------------------------
# Step 1: integer encoding
# ---------------------------------------------------------------------------

def encode_integers(domain: LiftedDomainAst, problem: LiftedProblemAst) -> IndexedModel:
    """Replace every name in the ASTs by a dense id; declaration order wins."""
    sym = SymbolTable()
    sym.add_type(ROOT_TYPE, 0)
    for child, parent in domain.types:
        sym.add_type(child, sym.type_ids[parent])
    for const in domain.constants:
        sym.add_object(const.name, sym.type_ids[const.type])
    for obj in problem.objects:
        sym.add_object(obj.name, sym.type_ids[obj.type])
    sym.finalise_hierarchy()
    for pname, pparams in domain.predicates:
        sym.predicate_ids[pname] = len(sym.predicate_names)
        sym.predicate_names.append(pname)
        sym.predicate_types.append(tuple(sym.type_ids[p.type] for p in pparams))
    for action in domain.actions:
        sym.action_ids[action.name] = len(sym.action_names)
        sym.action_names.append(action.name)
    for tname, _ in domain.compound_tasks:
        sym.compound_ids[tname] = len(sym.compound_names)
        sym.compound_names.append(tname)
    for method in domain.methods:
        sym.method_names.append(method.name)

    def term(value: str, params: dict[str, int]) -> int:
        if value.startswith("?"):
            return param_ref(params[value])
        return sym.object_ids[value]

    def atom(ast_atom, params: dict[str, int]) -> Atom:
        return (
            sym.predicate_ids[ast_atom.name],
            tuple(term(a, params) for a in ast_atom.args),
        )

    def split_condition(cond, params):
        pos = tuple(atom(l.atom, params) for l in cond.literals if l.positive)
        neg = tuple(atom(l.atom, params) for l in cond.literals if not l.positive)
        eq_pos = tuple(
            (term(e.left, params), term(e.right, params))
            for e in cond.equalities
            if e.positive
        )
        eq_neg = tuple(
            (term(e.left, params), term(e.right, params))
            for e in cond.equalities
            if not e.positive
        )
        return pos, neg, eq_pos, eq_neg

    actions = []
    for action in domain.actions:
        params = {p.name: i for i, p in enumerate(action.parameters)}
        types = tuple(sym.type_ids[p.type] for p in action.parameters)
        pos, neg, eq_pos, eq_neg = split_condition(action.precondition, params)
        actions.append(
            LiftedAction(
                name_id=sym.action_ids[action.name],
                param_types=types,
                param_domains=tuple(sym.type_members[t] for t in types),
                pre_pos=pos,
                pre_neg=neg,
                eff_add=tuple(atom(l.atom, params) for l in action.effect if l.positive),
                eff_del=tuple(atom(l.atom, params) for l in action.effect if not l.positive),
                eq_pos=eq_pos,
                eq_neg=eq_neg,
            )
        )

    def subtask(t, params: dict[str, int]) -> Subtask:
        primitive = t.atom.name in sym.action_ids
        name_id = sym.action_ids[t.atom.name] if primitive else sym.compound_ids[t.atom.name]
        return (primitive, name_id, tuple(term(a, params) for a in t.atom.args))

    methods = []
    for mid, method in enumerate(domain.methods):
        params = {p.name: i for i, p in enumerate(method.parameters)}
        types = tuple(sym.type_ids[p.type] for p in method.parameters)
        pos, neg, eq_pos, eq_neg = split_condition(method.precondition, params)
        label_index = {t.label: i for i, t in enumerate(method.subtasks)}
        if method.totally_ordered:
            ordering = tuple(
                (i, i + 1) for i in range(len(method.subtasks) - 1)
            )
        else:
            ordering = tuple(
                (label_index[a], label_index[b]) for a, b in method.ordering
            )
        methods.append(
            LiftedMethod(
                name_id=mid,
                param_types=types,
                param_domains=tuple(sym.type_members[t] for t in types),
                task_name=sym.compound_ids[method.task.name],
                task_args=tuple(term(a, params) for a in method.task.args),
                pre_pos=pos,
                pre_neg=neg,
                subtasks=tuple(subtask(t, params) for t in method.subtasks),
                ordering=ordering,
                totally_ordered=method.totally_ordered,
                eq_pos=eq_pos,
                eq_neg=eq_neg,
            )
        )

    init = frozenset(
        (sym.predicate_ids[a.name], tuple(sym.object_ids[x] for x in a.args))
        for a in problem.init
    )
    net_tasks = []
    for t in problem.network_tasks:
        primitive = t.atom.name in sym.action_ids
        name_id = sym.action_ids[t.atom.name] if primitive else sym.compound_ids[t.atom.name]
        net_tasks.append((primitive, name_id, tuple(sym.object_ids[a] for a in t.atom.args)))
    label_index = {t.label: i for i, t in enumerate(problem.network_tasks)}
    if problem.network_totally_ordered:
        net_ordering = tuple((i, i + 1) for i in range(len(net_tasks) - 1))
    else:
        net_ordering = tuple(
            (label_index[a], label_index[b]) for a, b in problem.network_ordering
        )

    return IndexedModel(
        symbols=sym,
        actions=tuple(actions),
        methods=tuple(methods),
        init=init,
        network_tasks=tuple(net_tasks),
        network_ordering=net_ordering,
        network_totally_ordered=problem.network_totally_ordered,
    )


# ---------------------------------------------------------------------------
# Step 2/3 prerequisite: inertia classification
# ---------------------------------------------------------------------------

def classify_inertia(model: IndexedModel) -> list[Inertia]:
    """Classify each predicate by scanning action effects only."""
    added = set()
    deleted = set()
    for action in model.actions:
        added.update(pred for pred, _ in action.eff_add)
        deleted.update(pred for pred, _ in action.eff_del)
    out = []
    for pred in range(len(model.symbols.predicate_names)):
        if pred not in added and pred not in deleted:
            out.append(Inertia.FULL)
        elif pred not in added:
            out.append(Inertia.POSITIVE)
        elif pred not in deleted:
            out.append(Inertia.NEGATIVE)
        else:
            out.append(Inertia.FLUENT)
    return out


# ---------------------------------------------------------------------------
# Step 2: parameter-domain inference from static predicates
# ---------------------------------------------------------------------------

def _init_tuples(model: IndexedModel) -> dict[int, list[tuple[int, ...]]]:
    by_pred: dict[int, list[tuple[int, ...]]] = {}
    for pred, args in model.init:
        by_pred.setdefault(pred, []).append(args)
    return by_pred


def _restrict_domains(
    op, inertia: list[Inertia], by_pred: dict[int, list[tuple[int, ...]]]
) -> tuple[frozenset[int], ...]:
    domains = list(op.param_domains)
    for pred, args in op.pre_pos:
        if inertia[pred] is not Inertia.FULL:
            continue
        tuples = by_pred.get(pred, [])
        # fix constant positions first, then project the variable ones
        candidates = [
            t
            for t in tuples
            if all(is_param(a) or t[i] == a for i, a in enumerate(args))
        ]
        for i, a in enumerate(args):
            if is_param(a):
                allowed = frozenset(t[i] for t in candidates)
                domains[param_index(a)] &= allowed
    return tuple(domains)


def infer_parameter_domains(model: IndexedModel, inertia: list[Inertia]) -> IndexedModel:
    """Intersect each parameter domain with the init projection of its static
    positive preconditions; domains only ever shrink."""
    by_pred = _init_tuples(model)
    actions = tuple(
        replace(a, param_domains=_restrict_domains(a, inertia, by_pred))
        for a in model.actions
    )
    methods = tuple(
        replace(m, param_domains=_restrict_domains(m, inertia, by_pred))
        for m in model.methods
    )
    return replace(model, actions=actions, methods=methods)


# ---------------------------------------------------------------------------
# Step 2: fold ground static literals against init
# ---------------------------------------------------------------------------

def _fold(op, inertia: list[Inertia], init: frozenset[Atom]):
    """Drop compile-time-true conjuncts; flag the operator when one is false."""
    doomed = False
    pre_pos = []
    for atom in op.pre_pos:
        pred, args = atom
        if inertia[pred] is Inertia.FULL and not any(is_param(a) for a in args):
            if atom not in init:
                doomed = True
        else:
            pre_pos.append(atom)
    pre_neg = []
    for atom in op.pre_neg:
        pred, args = atom
        if inertia[pred] is Inertia.FULL and not any(is_param(a) for a in args):
            if atom in init:
                doomed = True
        else:
            pre_neg.append(atom)
    eq_pos = []
    for left, right in op.eq_pos:
        if not is_param(left) and not is_param(right):
            if left != right:
                doomed = True
        else:
            eq_pos.append((left, right))
    eq_neg = []
    for left, right in op.eq_neg:
        if not is_param(left) and not is_param(right):
            if left == right:
                doomed = True
        else:
            eq_neg.append((left, right))
    return replace(
        op,
        pre_pos=tuple(pre_pos),
        pre_neg=tuple(pre_neg),
        eq_pos=tuple(eq_pos),
        eq_neg=tuple(eq_neg),
        uninstantiable=op.uninstantiable or doomed,
    )


def simplify(model: IndexedModel, inertia: list[Inertia]) -> IndexedModel:
    actions = tuple(_fold(a, inertia, model.init) for a in model.actions)
    methods = tuple(_fold(m, inertia, model.init) for m in model.methods)
    return replace(model, actions=actions, methods=methods)


# ---------------------------------------------------------------------------
# Debug dump
# ---------------------------------------------------------------------------

def dump_lifted(model: IndexedModel, inertia: list[Inertia] | None = None) -> str:
    sym = model.symbols
    out = ["types:"]
    for tid, name in enumerate(sym.type_names):
        out.append(f"  {tid}: {name} (parent {sym.type_parent[tid]})")
    out.append("objects:")
    for oid, name in enumerate(sym.object_names):
        out.append(f"  {oid}: {name} - {sym.type_names[sym.object_type[oid]]}")
    out.append("predicates:")
    for pid, name in enumerate(sym.predicate_names):
        flag = f" [{inertia[pid].value}]" if inertia else ""
        out.append(f"  {pid}: {name}/{len(sym.predicate_types[pid])}{flag}")

    def fmt_atoms(atoms):
        return " ".join(sym.decode_atom(a) for a in atoms) or "-"

    out.append("actions:")
    for action in model.actions:
        doms = " ".join(
            "{" + ",".join(sorted(sym.object_names[o] for o in dom)) + "}"
            for dom in action.param_domains
        )
        flag = " UNINSTANTIABLE" if action.uninstantiable else ""
        out.append(f"  {action.name_id}: {sym.action_names[action.name_id]}({doms}){flag}")
        out.append(f"    pre+ {fmt_atoms(action.pre_pos)}")
        out.append(f"    pre- {fmt_atoms(action.pre_neg)}")
        out.append(f"    add  {fmt_atoms(action.eff_add)}")
        out.append(f"    del  {fmt_atoms(action.eff_del)}")
    out.append("methods:")
    for method in model.methods:
        doms = " ".join(
            "{" + ",".join(sorted(sym.object_names[o] for o in dom)) + "}"
            for dom in method.param_domains
        )
        flag = " UNINSTANTIABLE" if method.uninstantiable else ""
        out.append(
            f"  {method.name_id}: {sym.method_names[method.name_id]}({doms})"
            f" task {sym.decode_task(False, method.task_name, method.task_args)}{flag}"
        )
        out.append(f"    pre+ {fmt_atoms(method.pre_pos)}")
        out.append(f"    pre- {fmt_atoms(method.pre_neg)}")
        subs = " ".join(sym.decode_task(*t) for t in method.subtasks) or "-"
        out.append(f"    subtasks {subs}")
        out.append(f"    ordering {sorted(method.ordering)}")
    out.append("init: " + (" ".join(sorted(sym.decode_atom(a) for a in model.init)) or "-"))
    net = " ".join(sym.decode_task(*t) for t in model.network_tasks) or "-"
    out.append(f"network: {net} ordering {sorted(model.network_ordering)}")
    return "\n".join(out) + "\n"
