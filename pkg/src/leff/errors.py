"""Exception hierarchy shared by every phase."""
from __future__ import annotations

from dataclasses import dataclass


class LeffError(Exception):
    """Base class for all errors raised by the toolchain."""


class RegistryError(LeffError):
    """Conflicting or unknown symbol in the signature registry."""


class EffectConflict(RegistryError):
    """Two effect sets disagree on the signature of an operation."""


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    """One located message, rendered as ``file:line:col: severity: message``."""

    file: str
    span: Span
    severity: str
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


class ParseError(LeffError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


class TypeCheckError(LeffError):
    """Raised by both the simple and the effect checker."""

    def __init__(self, message: str, span: Span | None = None):
        self.message = message
        self.span = span
        super().__init__(message)


class EffectError(TypeCheckError):
    """An operation escapes the ambient effect set, or a handler ascription is wrong."""


class ProfileViolation(LeffError):
    def __init__(self, violations: list[tuple[Span, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(msg for _, msg in self.violations))


class LeffRuntimeError(LeffError):
    """A fault during evaluation (distinct from getting stuck on an operation)."""


class RuntimeTypeError(LeffRuntimeError):
    """A redex of the wrong shape, e.g. projecting from a non-pair."""


class BuiltinFailure(LeffRuntimeError):
    """A partial builtin was applied outside its domain."""
