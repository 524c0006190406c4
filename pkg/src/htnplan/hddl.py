"""HDDL frontend: lexer, lifted AST, and recursive-descent parser.

Supports the conjunctive subset of HDDL: typed parameters, positive and
negative literal conditions, `=` constraints, compound task declarations,
and methods written either with `:ordered-subtasks` or with labelled
`:subtasks` plus `:ordering` pairs.  Quantifiers and conditional effects
are rejected.  Symbols are case-insensitive and normalised to lower case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DomainMismatch,
    HddlSyntaxError,
    IllegalCharacter,
    SemanticError,
    UnsupportedRequirement,
)

ROOT_TYPE = "object"

SUPPORTED_REQUIREMENTS = frozenset(
    {
        ":typing",
        ":negative-preconditions",
        ":hierarchy",
        ":htn",
        ":method-preconditions",
        ":equality",
    }
)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

class TokenKind(Enum):
    LPAREN = "("
    RPAREN = ")"
    KEYWORD = "keyword"
    IDENT = "identifier"
    VARIABLE = "variable"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int


_WORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789-_")
_PUNCT_IDENTS = frozenset("=<>")


def tokenize(source: str) -> list[Token]:
    """Break HDDL source into tokens; `;` comments run to end of line."""
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and source[i] != "\n":
                i += 1
        elif c == "(":
            tokens.append(Token(TokenKind.LPAREN, "(", line, col))
            col += 1
            i += 1
        elif c == ")":
            tokens.append(Token(TokenKind.RPAREN, ")", line, col))
            col += 1
            i += 1
        elif c in "?:":
            j = i + 1
            while j < n and source[j].lower() in _WORD_CHARS:
                j += 1
            if j == i + 1:
                raise IllegalCharacter(c, line, col)
            kind = TokenKind.VARIABLE if c == "?" else TokenKind.KEYWORD
            tokens.append(Token(kind, source[i:j].lower(), line, col))
            col += j - i
            i = j
        elif c.lower() in _WORD_CHARS:
            j = i
            while j < n and source[j].lower() in _WORD_CHARS:
                j += 1
            tokens.append(Token(TokenKind.IDENT, source[i:j].lower(), line, col))
            col += j - i
            i = j
        elif c in _PUNCT_IDENTS:
            tokens.append(Token(TokenKind.IDENT, c, line, col))
            col += 1
            i += 1
        else:
            raise IllegalCharacter(c, line, col)
    return tokens


# ---------------------------------------------------------------------------
# Lifted AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypedName:
    """An object, constant, or parameter together with its declared type."""

    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class Atom:
    """Predicate or task application; args are variables or object names."""

    name: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class Equality:
    """An `=` constraint between two terms (variables or constants)."""

    left: str
    right: str
    positive: bool = True


@dataclass(frozen=True)
class Condition:
    """Conjunction of literals plus equality constraints."""

    literals: tuple[Literal, ...] = ()
    equalities: tuple[Equality, ...] = ()


@dataclass(frozen=True)
class LabeledTask:
    label: str
    atom: Atom


@dataclass(frozen=True)
class LiftedActionAst:
    name: str
    parameters: tuple[TypedName, ...]
    precondition: Condition
    effect: tuple[Literal, ...]


@dataclass(frozen=True)
class LiftedMethodAst:
    name: str
    parameters: tuple[TypedName, ...]
    task: Atom
    precondition: Condition
    subtasks: tuple[LabeledTask, ...]
    ordering: tuple[tuple[str, str], ...]
    totally_ordered: bool


@dataclass(frozen=True)
class LiftedDomainAst:
    name: str
    requirements: tuple[str, ...]
    types: tuple[tuple[str, str], ...]
    constants: tuple[TypedName, ...]
    predicates: tuple[tuple[str, tuple[TypedName, ...]], ...]
    compound_tasks: tuple[tuple[str, tuple[TypedName, ...]], ...]
    actions: tuple[LiftedActionAst, ...]
    methods: tuple[LiftedMethodAst, ...]


@dataclass(frozen=True)
class LiftedProblemAst:
    name: str
    domain_name: str
    objects: tuple[TypedName, ...]
    init: tuple[Atom, ...]
    network_tasks: tuple[LabeledTask, ...]
    network_ordering: tuple[tuple[str, str], ...]
    network_totally_ordered: bool


# ---------------------------------------------------------------------------
# Token stream
# ---------------------------------------------------------------------------

class _Stream:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    @property
    def exhausted(self) -> bool:
        return self._pos >= len(self._tokens)

    def peek(self) -> Token | None:
        if self._pos < len(self._tokens):
            return self._tokens[self._pos]
        return None

    def next(self, expected: str) -> Token:
        tok = self.peek()
        if tok is None:
            last = self._tokens[-1] if self._tokens else Token(TokenKind.IDENT, "", 1, 1)
            raise HddlSyntaxError(last.line, last.column, f"{expected}, found end of input")
        self._pos += 1
        return tok

    def expect(self, kind: TokenKind, text: str | None = None) -> Token:
        what = text if text is not None else kind.value
        tok = self.next(what)
        if tok.kind is not kind or (text is not None and tok.text != text):
            raise HddlSyntaxError(tok.line, tok.column, f"{what}, found {tok.text!r}")
        return tok

    def at(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self.peek()
        return (
            tok is not None
            and tok.kind is kind
            and (text is None or tok.text == text)
        )


def _err(tok: Token, message: str) -> SemanticError:
    return SemanticError(tok.line, tok.column, message)


# ---------------------------------------------------------------------------
# Shared parsing pieces
# ---------------------------------------------------------------------------

def _parse_typed_names(stream: _Stream, variables: bool) -> list[TypedName]:
    """Parse `a b - t c - u d` style lists; untyped names default to object."""
    kind = TokenKind.VARIABLE if variables else TokenKind.IDENT
    out: list[TypedName] = []
    pending: list[str] = []
    while not stream.at(TokenKind.RPAREN):
        tok = stream.peek()
        if tok is not None and tok.kind is TokenKind.IDENT and tok.text == "-":
            stream.next("-")
            type_tok = stream.expect(TokenKind.IDENT)
            if not pending:
                raise HddlSyntaxError(type_tok.line, type_tok.column, "names before '-'")
            out.extend(TypedName(name, type_tok.text) for name in pending)
            pending = []
        else:
            name_tok = stream.expect(kind)
            pending.append(name_tok.text)
    out.extend(TypedName(name) for name in pending)
    return out


class _Declarations:
    """Symbol environment accumulated while parsing a domain."""

    def __init__(self):
        self.types: set[str] = {ROOT_TYPE}
        self.constants: dict[str, str] = {}
        self.predicates: dict[str, int] = {}
        self.compound_tasks: dict[str, int] = {}
        self.actions: dict[str, int] = {}
        self.objects: dict[str, str] = {}

    def task_arity(self, name: str) -> int | None:
        if name in self.actions:
            return self.actions[name]
        if name in self.compound_tasks:
            return self.compound_tasks[name]
        return None

    def check_term(self, tok: Token, term: str, params: dict[str, str]) -> None:
        if term.startswith("?"):
            if term not in params:
                raise _err(tok, f"undeclared variable {term}")
        elif term not in self.constants and term not in self.objects:
            raise _err(tok, f"undeclared object or constant {term}")


def _parse_atom(stream: _Stream) -> tuple[Atom, Token]:
    open_tok = stream.expect(TokenKind.LPAREN)
    name_tok = stream.next("predicate or task name")
    if name_tok.kind not in (TokenKind.IDENT,):
        raise HddlSyntaxError(name_tok.line, name_tok.column, f"a name, found {name_tok.text!r}")
    args: list[str] = []
    while not stream.at(TokenKind.RPAREN):
        arg = stream.next("argument or ')'")
        if arg.kind not in (TokenKind.IDENT, TokenKind.VARIABLE):
            raise HddlSyntaxError(arg.line, arg.column, f"argument, found {arg.text!r}")
        args.append(arg.text)
    stream.expect(TokenKind.RPAREN)
    return Atom(name_tok.text, tuple(args)), name_tok


def _check_predicate_atom(
    decls: _Declarations, atom: Atom, tok: Token, params: dict[str, str]
) -> None:
    if atom.name not in decls.predicates:
        raise _err(tok, f"undeclared predicate {atom.name}")
    if len(atom.args) != decls.predicates[atom.name]:
        raise _err(
            tok,
            f"predicate {atom.name} expects {decls.predicates[atom.name]} "
            f"arguments, got {len(atom.args)}",
        )
    for arg in atom.args:
        decls.check_term(tok, arg, params)


def _parse_condition(
    stream: _Stream, decls: _Declarations, params: dict[str, str]
) -> Condition:
    """Parse `()`, a single literal, or `(and lit*)`; `=` becomes an Equality."""
    literals: list[Literal] = []
    equalities: list[Equality] = []

    def parse_literal(positive: bool) -> None:
        open_tok = stream.expect(TokenKind.LPAREN)
        head = stream.peek()
        if head is None:
            raise HddlSyntaxError(open_tok.line, open_tok.column, "a literal")
        if head.kind is TokenKind.IDENT and head.text == "not":
            if not positive:
                raise _err(head, "nested negation is not supported")
            stream.next("not")
            parse_literal(False)
            stream.expect(TokenKind.RPAREN)
            return
        if head.kind is TokenKind.IDENT and head.text in ("forall", "exists", "when", "or", "imply"):
            raise _err(head, f"'{head.text}' conditions are not supported")
        if head.kind is TokenKind.IDENT and head.text == "=":
            stream.next("=")
            left = stream.next("term")
            right = stream.next("term")
            for term_tok in (left, right):
                if term_tok.kind not in (TokenKind.IDENT, TokenKind.VARIABLE):
                    raise HddlSyntaxError(term_tok.line, term_tok.column, "a term")
                decls.check_term(term_tok, term_tok.text, params)
            stream.expect(TokenKind.RPAREN)
            equalities.append(Equality(left.text, right.text, positive))
            return
        # plain predicate literal
        name_tok = stream.expect(TokenKind.IDENT)
        args: list[str] = []
        while not stream.at(TokenKind.RPAREN):
            arg = stream.next("argument or ')'")
            if arg.kind not in (TokenKind.IDENT, TokenKind.VARIABLE):
                raise HddlSyntaxError(arg.line, arg.column, f"argument, found {arg.text!r}")
            args.append(arg.text)
        stream.expect(TokenKind.RPAREN)
        atom = Atom(name_tok.text, tuple(args))
        _check_predicate_atom(decls, atom, name_tok, params)
        literals.append(Literal(atom, positive))

    stream.expect(TokenKind.LPAREN)
    if stream.at(TokenKind.RPAREN):
        stream.expect(TokenKind.RPAREN)
        return Condition()
    head = stream.peek()
    if head is not None and head.kind is TokenKind.IDENT and head.text == "and":
        stream.next("and")
        while not stream.at(TokenKind.RPAREN):
            parse_literal(True)
        stream.expect(TokenKind.RPAREN)
    else:
        # single literal without the (and ...) wrapper: re-parse from the '('
        stream._pos -= 1
        parse_literal(True)
    return Condition(tuple(literals), tuple(equalities))


def _parse_effect(
    stream: _Stream, decls: _Declarations, params: dict[str, str]
) -> tuple[Literal, ...]:
    cond = _parse_condition(stream, decls, params)
    if cond.equalities:
        raise SemanticError(0, 0, "'=' is not allowed in effects")
    return cond.literals


def _parse_task_list(
    stream: _Stream,
    decls: _Declarations,
    params: dict[str, str],
    ground: bool,
) -> tuple[LabeledTask, ...]:
    """Parse `()`, one task, or `(and item*)`; items may carry labels."""
    items: list[LabeledTask] = []
    labels_seen: set[str] = set()

    def check_task_atom(atom: Atom, tok: Token) -> None:
        arity = decls.task_arity(atom.name)
        if arity is None:
            raise _err(tok, f"undeclared task or action {atom.name}")
        if len(atom.args) != arity:
            raise _err(tok, f"task {atom.name} expects {arity} arguments, got {len(atom.args)}")
        for arg in atom.args:
            if ground and arg.startswith("?"):
                raise _err(tok, f"variable {arg} in a ground task network")
            decls.check_term(tok, arg, params)

    def parse_item() -> None:
        open_tok = stream.expect(TokenKind.LPAREN)
        first = stream.next("task or label")
        second = stream.peek()
        if first.kind is TokenKind.IDENT and second is not None and second.kind is TokenKind.LPAREN:
            # labelled: (label (task args))
            label = first.text
            atom, name_tok = _parse_atom(stream)
            stream.expect(TokenKind.RPAREN)
        else:
            label = f"t{len(items)}"
            if first.kind is not TokenKind.IDENT:
                raise HddlSyntaxError(first.line, first.column, f"task name, found {first.text!r}")
            args: list[str] = []
            while not stream.at(TokenKind.RPAREN):
                arg = stream.next("argument or ')'")
                if arg.kind not in (TokenKind.IDENT, TokenKind.VARIABLE):
                    raise HddlSyntaxError(arg.line, arg.column, f"argument, found {arg.text!r}")
                args.append(arg.text)
            stream.expect(TokenKind.RPAREN)
            atom, name_tok = Atom(first.text, tuple(args)), first
        if label in labels_seen:
            raise _err(name_tok, f"duplicate subtask label {label}")
        labels_seen.add(label)
        check_task_atom(atom, name_tok)
        items.append(LabeledTask(label, atom))

    stream.expect(TokenKind.LPAREN)
    if stream.at(TokenKind.RPAREN):
        stream.expect(TokenKind.RPAREN)
        return ()
    head = stream.peek()
    if head is not None and head.kind is TokenKind.IDENT and head.text == "and":
        stream.next("and")
        while not stream.at(TokenKind.RPAREN):
            parse_item()
        stream.expect(TokenKind.RPAREN)
    else:
        stream._pos -= 1
        parse_item()
    return tuple(items)


def _parse_ordering(
    stream: _Stream, labels: set[str]
) -> tuple[tuple[str, str], ...]:
    pairs: list[tuple[str, str]] = []

    def parse_pair() -> None:
        stream.expect(TokenKind.LPAREN)
        op = stream.expect(TokenKind.IDENT)
        if op.text != "<":
            raise HddlSyntaxError(op.line, op.column, f"'<', found {op.text!r}")
        a = stream.expect(TokenKind.IDENT)
        b = stream.expect(TokenKind.IDENT)
        for tok in (a, b):
            if tok.text not in labels:
                raise _err(tok, f"undeclared subtask label {tok.text}")
        if a.text == b.text:
            raise _err(a, f"ordering constraint {a.text} < {b.text} is self-referential")
        stream.expect(TokenKind.RPAREN)
        pairs.append((a.text, b.text))

    stream.expect(TokenKind.LPAREN)
    if stream.at(TokenKind.RPAREN):
        stream.expect(TokenKind.RPAREN)
        return ()
    head = stream.peek()
    if head is not None and head.kind is TokenKind.IDENT and head.text == "and":
        stream.next("and")
        while not stream.at(TokenKind.RPAREN):
            parse_pair()
        stream.expect(TokenKind.RPAREN)
    else:
        stream._pos -= 1
        parse_pair()
    return tuple(pairs)


def _params_env(parameters: tuple[TypedName, ...], decls: _Declarations, tok: Token) -> dict[str, str]:
    env: dict[str, str] = {}
    for p in parameters:
        if p.type not in decls.types:
            raise _err(tok, f"undeclared type {p.type}")
        if p.name in env:
            raise _err(tok, f"duplicate parameter {p.name}")
        env[p.name] = p.type
    return env


# ---------------------------------------------------------------------------
# Domain parser
# ---------------------------------------------------------------------------

def parse_domain(tokens: list[Token]) -> LiftedDomainAst:
    stream = _Stream(tokens)
    decls = _Declarations()

    stream.expect(TokenKind.LPAREN)
    stream.expect(TokenKind.IDENT, "define")
    stream.expect(TokenKind.LPAREN)
    stream.expect(TokenKind.IDENT, "domain")
    name = stream.expect(TokenKind.IDENT).text
    stream.expect(TokenKind.RPAREN)

    requirements: list[str] = []
    types: list[tuple[str, str]] = []
    constants: list[TypedName] = []
    predicates: list[tuple[str, tuple[TypedName, ...]]] = []
    compound_tasks: list[tuple[str, tuple[TypedName, ...]]] = []
    actions: list[LiftedActionAst] = []
    methods: list[LiftedMethodAst] = []

    while not stream.at(TokenKind.RPAREN):
        stream.expect(TokenKind.LPAREN)
        section = stream.next("a domain section keyword")
        if section.kind is not TokenKind.KEYWORD:
            raise HddlSyntaxError(section.line, section.column, f"a section keyword, found {section.text!r}")

        if section.text == ":requirements":
            while not stream.at(TokenKind.RPAREN):
                flag = stream.expect(TokenKind.KEYWORD)
                if flag.text not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirement(flag.text, flag.line, flag.column)
                requirements.append(flag.text)
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":types":
            entries = _parse_typed_names(stream, variables=False)
            stream.expect(TokenKind.RPAREN)
            for entry in entries:
                if entry.name == ROOT_TYPE:
                    continue
                types.append((entry.name, entry.type))
                decls.types.add(entry.name)
            parent_of = dict(types)
            for child, parent in types:
                if parent not in decls.types:
                    raise _err(section, f"undeclared parent type {parent}")
                seen = {child}
                node = parent
                while node != ROOT_TYPE:
                    if node in seen:
                        raise _err(section, f"type hierarchy cycle through {node}")
                    seen.add(node)
                    node = parent_of.get(node, ROOT_TYPE)

        elif section.text == ":constants":
            entries = _parse_typed_names(stream, variables=False)
            stream.expect(TokenKind.RPAREN)
            for entry in entries:
                if entry.type not in decls.types:
                    raise _err(section, f"undeclared type {entry.type}")
                if entry.name in decls.constants:
                    raise _err(section, f"duplicate constant {entry.name}")
                decls.constants[entry.name] = entry.type
                constants.append(entry)

        elif section.text == ":predicates":
            while not stream.at(TokenKind.RPAREN):
                stream.expect(TokenKind.LPAREN)
                pname = stream.expect(TokenKind.IDENT)
                params = tuple(_parse_typed_names(stream, variables=True))
                stream.expect(TokenKind.RPAREN)
                for p in params:
                    if p.type not in decls.types:
                        raise _err(pname, f"undeclared type {p.type}")
                if pname.text in decls.predicates:
                    raise _err(pname, f"duplicate predicate {pname.text}")
                decls.predicates[pname.text] = len(params)
                predicates.append((pname.text, params))
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":task":
            tname = stream.expect(TokenKind.IDENT)
            params: tuple[TypedName, ...] = ()
            if stream.at(TokenKind.KEYWORD, ":parameters"):
                stream.next(":parameters")
                stream.expect(TokenKind.LPAREN)
                params = tuple(_parse_typed_names(stream, variables=True))
                stream.expect(TokenKind.RPAREN)
            stream.expect(TokenKind.RPAREN)
            _params_env(params, decls, tname)
            if decls.task_arity(tname.text) is not None:
                raise _err(tname, f"duplicate task {tname.text}")
            decls.compound_tasks[tname.text] = len(params)
            compound_tasks.append((tname.text, params))

        elif section.text == ":action":
            aname = stream.expect(TokenKind.IDENT)
            stream.expect(TokenKind.KEYWORD, ":parameters")
            stream.expect(TokenKind.LPAREN)
            params = tuple(_parse_typed_names(stream, variables=True))
            stream.expect(TokenKind.RPAREN)
            env = _params_env(params, decls, aname)
            precondition = Condition()
            effect: tuple[Literal, ...] = ()
            while not stream.at(TokenKind.RPAREN):
                part = stream.expect(TokenKind.KEYWORD)
                if part.text == ":precondition":
                    precondition = _parse_condition(stream, decls, env)
                elif part.text == ":effect":
                    effect = _parse_effect(stream, decls, env)
                else:
                    raise HddlSyntaxError(part.line, part.column, f":precondition or :effect, found {part.text!r}")
            stream.expect(TokenKind.RPAREN)
            if decls.task_arity(aname.text) is not None:
                raise _err(aname, f"duplicate action or task name {aname.text}")
            decls.actions[aname.text] = len(params)
            actions.append(LiftedActionAst(aname.text, params, precondition, effect))

        elif section.text == ":method":
            methods.append(_parse_method(stream, decls))

        else:
            raise _err(section, f"unknown domain section {section.text}")

    stream.expect(TokenKind.RPAREN)
    if not stream.exhausted:
        tok = stream.peek()
        assert tok is not None
        raise HddlSyntaxError(tok.line, tok.column, f"end of input, found {tok.text!r}")

    return LiftedDomainAst(
        name=name,
        requirements=tuple(requirements),
        types=tuple(types),
        constants=tuple(constants),
        predicates=tuple(predicates),
        compound_tasks=tuple(compound_tasks),
        actions=tuple(actions),
        methods=tuple(methods),
    )


def _parse_method(stream: _Stream, decls: _Declarations) -> LiftedMethodAst:
    mname = stream.expect(TokenKind.IDENT)
    params: tuple[TypedName, ...] = ()
    task: Atom | None = None
    precondition = Condition()
    subtasks: tuple[LabeledTask, ...] = ()
    ordering: tuple[tuple[str, str], ...] = ()
    totally_ordered = False
    saw_subtasks = False
    env: dict[str, str] = {}

    while not stream.at(TokenKind.RPAREN):
        part = stream.expect(TokenKind.KEYWORD)
        if part.text == ":parameters":
            stream.expect(TokenKind.LPAREN)
            params = tuple(_parse_typed_names(stream, variables=True))
            stream.expect(TokenKind.RPAREN)
            env = _params_env(params, decls, part)
        elif part.text == ":task":
            atom, name_tok = _parse_atom(stream)
            if atom.name not in decls.compound_tasks:
                raise _err(name_tok, f"undeclared task {atom.name}")
            if len(atom.args) != decls.compound_tasks[atom.name]:
                raise _err(name_tok, f"task {atom.name} expects {decls.compound_tasks[atom.name]} arguments")
            for arg in atom.args:
                decls.check_term(name_tok, arg, env)
            task = atom
        elif part.text == ":precondition":
            precondition = _parse_condition(stream, decls, env)
        elif part.text in (":ordered-subtasks", ":ordered-tasks"):
            subtasks = _parse_task_list(stream, decls, env, ground=False)
            totally_ordered = True
            saw_subtasks = True
        elif part.text in (":subtasks", ":tasks"):
            subtasks = _parse_task_list(stream, decls, env, ground=False)
            saw_subtasks = True
        elif part.text == ":ordering":
            ordering = _parse_ordering(stream, {t.label for t in subtasks})
        else:
            raise HddlSyntaxError(part.line, part.column, f"a method section, found {part.text!r}")
    stream.expect(TokenKind.RPAREN)

    if task is None:
        raise _err(mname, f"method {mname.text} has no :task")
    if not saw_subtasks:
        raise _err(mname, f"method {mname.text} has no subtasks")
    if totally_ordered and ordering:
        raise _err(mname, "ordered-subtasks methods cannot carry :ordering")
    return LiftedMethodAst(
        name=mname.text,
        parameters=params,
        task=task,
        precondition=precondition,
        subtasks=subtasks,
        ordering=ordering,
        totally_ordered=totally_ordered,
    )


# ---------------------------------------------------------------------------
# Problem parser
# ---------------------------------------------------------------------------

def parse_problem(tokens: list[Token], domain: LiftedDomainAst) -> LiftedProblemAst:
    stream = _Stream(tokens)
    decls = _Declarations()
    decls.types |= {ROOT_TYPE, *(t for t, _ in domain.types)}
    decls.constants = {c.name: c.type for c in domain.constants}
    decls.predicates = {p: len(ps) for p, ps in domain.predicates}
    decls.compound_tasks = {t: len(ps) for t, ps in domain.compound_tasks}
    decls.actions = {a.name: len(a.parameters) for a in domain.actions}

    stream.expect(TokenKind.LPAREN)
    stream.expect(TokenKind.IDENT, "define")
    stream.expect(TokenKind.LPAREN)
    stream.expect(TokenKind.IDENT, "problem")
    name = stream.expect(TokenKind.IDENT).text
    stream.expect(TokenKind.RPAREN)

    domain_name: str | None = None
    objects: list[TypedName] = []
    init: list[Atom] = []
    network_tasks: tuple[LabeledTask, ...] = ()
    network_ordering: tuple[tuple[str, str], ...] = ()
    network_totally_ordered = False
    saw_htn = False

    while not stream.at(TokenKind.RPAREN):
        stream.expect(TokenKind.LPAREN)
        section = stream.next("a problem section keyword")
        if section.kind is not TokenKind.KEYWORD:
            raise HddlSyntaxError(section.line, section.column, f"a section keyword, found {section.text!r}")

        if section.text == ":domain":
            dname = stream.expect(TokenKind.IDENT)
            if dname.text != domain.name:
                raise DomainMismatch(
                    f"{dname.line}:{dname.column}: problem requires domain "
                    f"{dname.text!r} but {domain.name!r} was parsed"
                )
            domain_name = dname.text
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":requirements":
            while not stream.at(TokenKind.RPAREN):
                flag = stream.expect(TokenKind.KEYWORD)
                if flag.text not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirement(flag.text, flag.line, flag.column)
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":objects":
            entries = _parse_typed_names(stream, variables=False)
            stream.expect(TokenKind.RPAREN)
            for entry in entries:
                if entry.type not in decls.types:
                    raise _err(section, f"undeclared type {entry.type}")
                if entry.name in decls.objects or entry.name in decls.constants:
                    raise _err(section, f"duplicate object {entry.name}")
                decls.objects[entry.name] = entry.type
                objects.append(entry)

        elif section.text == ":htn":
            saw_htn = True
            while not stream.at(TokenKind.RPAREN):
                part = stream.expect(TokenKind.KEYWORD)
                if part.text == ":parameters":
                    stream.expect(TokenKind.LPAREN)
                    extra = _parse_typed_names(stream, variables=True)
                    stream.expect(TokenKind.RPAREN)
                    if extra:
                        raise _err(part, "non-empty :htn :parameters are not supported")
                elif part.text in (":ordered-subtasks", ":ordered-tasks"):
                    network_tasks = _parse_task_list(stream, decls, {}, ground=True)
                    network_totally_ordered = True
                elif part.text in (":subtasks", ":tasks"):
                    network_tasks = _parse_task_list(stream, decls, {}, ground=True)
                elif part.text == ":ordering":
                    network_ordering = _parse_ordering(stream, {t.label for t in network_tasks})
                else:
                    raise HddlSyntaxError(part.line, part.column, f"an :htn section, found {part.text!r}")
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":init":
            while not stream.at(TokenKind.RPAREN):
                atom, name_tok = _parse_atom(stream)
                _check_predicate_atom(decls, atom, name_tok, {})
                for arg in atom.args:
                    if arg.startswith("?"):
                        raise _err(name_tok, f"variable {arg} in :init")
                init.append(atom)
            stream.expect(TokenKind.RPAREN)

        elif section.text == ":goal":
            cond = _parse_condition(stream, decls, {})
            if cond.literals or cond.equalities:
                raise _err(section, "state goals are not supported; use an :htn network")

        else:
            raise _err(section, f"unknown problem section {section.text}")

    stream.expect(TokenKind.RPAREN)
    if not stream.exhausted:
        tok = stream.peek()
        assert tok is not None
        raise HddlSyntaxError(tok.line, tok.column, f"end of input, found {tok.text!r}")

    if domain_name is None:
        raise DomainMismatch(f"problem {name} has no :domain declaration")
    if not saw_htn:
        raise SemanticError(1, 1, f"problem {name} has no :htn section")

    return LiftedProblemAst(
        name=name,
        domain_name=domain_name,
        objects=tuple(objects),
        init=tuple(init),
        network_tasks=network_tasks,
        network_ordering=network_ordering,
        network_totally_ordered=network_totally_ordered,
    )


def parse_domain_file(path) -> LiftedDomainAst:
    with open(path, encoding="utf-8") as handle:
        return parse_domain(tokenize(handle.read()))


def parse_problem_file(path, domain: LiftedDomainAst) -> LiftedProblemAst:
    with open(path, encoding="utf-8") as handle:
        return parse_problem(tokenize(handle.read()), domain)


# ---------------------------------------------------------------------------
# Unparser (round-trip support)
# ---------------------------------------------------------------------------

def _fmt_typed(entries) -> str:
    return " ".join(f"{e.name} - {e.type}" for e in entries)


def _fmt_atom(atom: Atom) -> str:
    return "(" + " ".join((atom.name, *atom.args)) + ")"


def _fmt_condition(cond: Condition) -> str:
    parts = []
    for lit in cond.literals:
        parts.append(_fmt_atom(lit.atom) if lit.positive else f"(not {_fmt_atom(lit.atom)})")
    for eq in cond.equalities:
        body = f"(= {eq.left} {eq.right})"
        parts.append(body if eq.positive else f"(not {body})")
    return "(and " + " ".join(parts) + ")" if parts else "()"


def _fmt_effect(effect: tuple[Literal, ...]) -> str:
    parts = [
        _fmt_atom(lit.atom) if lit.positive else f"(not {_fmt_atom(lit.atom)})"
        for lit in effect
    ]
    return "(and " + " ".join(parts) + ")" if parts else "()"


def _fmt_task_list(tasks: tuple[LabeledTask, ...], labelled: bool) -> str:
    if not tasks:
        return "()"
    if labelled:
        items = [f"({t.label} {_fmt_atom(t.atom)})" for t in tasks]
    else:
        items = [_fmt_atom(t.atom) for t in tasks]
    return "(and " + " ".join(items) + ")"


def _fmt_ordering(pairs: tuple[tuple[str, str], ...]) -> str:
    if not pairs:
        return "()"
    return "(and " + " ".join(f"(< {a} {b})" for a, b in pairs) + ")"


def unparse_domain(domain: LiftedDomainAst) -> str:
    out = [f"(define (domain {domain.name})"]
    if domain.requirements:
        out.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        out.append("  (:types " + " ".join(f"{c} - {p}" for c, p in domain.types) + ")")
    if domain.constants:
        out.append("  (:constants " + _fmt_typed(domain.constants) + ")")
    if domain.predicates:
        preds = " ".join(
            "(" + nm + ("" if not ps else " " + _fmt_typed(ps)) + ")"
            for nm, ps in domain.predicates
        )
        out.append("  (:predicates " + preds + ")")
    for tname, tparams in domain.compound_tasks:
        out.append(f"  (:task {tname} :parameters ({_fmt_typed(tparams)}))")
    for m in domain.methods:
        lines = [f"  (:method {m.name}"]
        lines.append(f"    :parameters ({_fmt_typed(m.parameters)})")
        lines.append(f"    :task {_fmt_atom(m.task)}")
        if m.precondition.literals or m.precondition.equalities:
            lines.append(f"    :precondition {_fmt_condition(m.precondition)}")
        if m.totally_ordered:
            lines.append(f"    :ordered-subtasks {_fmt_task_list(m.subtasks, labelled=False)})")
        else:
            lines.append(f"    :subtasks {_fmt_task_list(m.subtasks, labelled=True)}")
            lines.append(f"    :ordering {_fmt_ordering(m.ordering)})")
        out.append("\n".join(lines))
    for a in domain.actions:
        out.append(
            f"  (:action {a.name}\n"
            f"    :parameters ({_fmt_typed(a.parameters)})\n"
            f"    :precondition {_fmt_condition(a.precondition)}\n"
            f"    :effect {_fmt_effect(a.effect)})"
        )
    out.append(")")
    return "\n".join(out) + "\n"


def unparse_problem(problem: LiftedProblemAst) -> str:
    out = [f"(define (problem {problem.name})", f"  (:domain {problem.domain_name})"]
    if problem.objects:
        out.append("  (:objects " + _fmt_typed(problem.objects) + ")")
    if problem.network_totally_ordered:
        out.append(
            "  (:htn :parameters () :ordered-subtasks "
            + _fmt_task_list(problem.network_tasks, labelled=False)
            + ")"
        )
    else:
        out.append(
            "  (:htn :parameters () :subtasks "
            + _fmt_task_list(problem.network_tasks, labelled=True)
            + " :ordering "
            + _fmt_ordering(problem.network_ordering)
            + ")"
        )
    out.append("  (:init " + " ".join(_fmt_atom(a) for a in problem.init) + ")")
    out.append(")")
    return "\n".join(out) + "\n"
