"""Exception hierarchy shared across the planner."""

from __future__ import annotations


class PlannerError(Exception):
    """Base class for every error raised by this package."""


class InputError(PlannerError):
    """Anything wrong with the HDDL input; mapped to exit code 3 by the CLI."""


class IllegalCharacter(InputError):
    """A byte outside the HDDL lexical alphabet."""

    def __init__(self, char: str, line: int, column: int):
        super().__init__(f"{line}:{column}: illegal character {char!r}")
        self.char = char
        self.line = line
        self.column = column


class HddlSyntaxError(InputError):
    """Token-level parse failure; carries the position and what was expected."""

    def __init__(self, line: int, column: int, expected: str):
        super().__init__(f"{line}:{column}: expected {expected}")
        self.line = line
        self.column = column
        self.expected = expected


class SemanticError(InputError):
    """Undeclared symbol, arity mismatch, or an unsupported construct."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnsupportedRequirement(InputError):
    def __init__(self, name: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: unsupported requirement {name}")
        self.name = name
        self.line = line
        self.column = column


class DomainMismatch(InputError):
    """Problem file names a different domain than the one parsed with it."""


class PlanFormatError(InputError):
    """Malformed hierarchical plan text."""


class NotTotallyOrdered(InputError):
    """TFD was asked to solve a problem with a partially ordered network or method."""
