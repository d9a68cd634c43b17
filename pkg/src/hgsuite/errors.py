"""Shared exception types.

Every error carries a stable ``code`` string so callers (CLI, service,
tests) can dispatch without parsing messages.
"""

from __future__ import annotations


class HgError(Exception):
    """Base class for all package errors."""

    def __init__(self, code: str, message: str, *, line: int | None = None, col: int | None = None):
        self.code = code
        self.message = message
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{code}{where}: {message}")


class HglSyntaxError(HgError):
    """Lexing or parsing failure (codes: SyntaxError, MissingAppHeader, DuplicateName)."""


class CatalogError(HgError):
    """Effects catalog problems (codes: SchemaViolation, DanglingFeature)."""


class SchemaError(HgError):
    """Rule-file or state-file schema problems (code: SchemaViolation)."""


class UriError(HgError):
    """Configuration URI problems (codes: MalformedUri, MissingAppName)."""


class BindError(HgError):
    """Binding failures (codes: MissingBinding, SortMismatch)."""


class ExtractionError(HgError):
    """Symbolic execution failures (codes: PathBudgetExceeded, NonConstantDelay, ...)."""


class SolverError(HgError):
    """Solver/merge failures (codes: NonLinear, OracleBudgetExceeded, SortMismatch)."""


class DetectionError(HgError):
    """Threat detection failures (code: ChainBudgetExceeded)."""


class SessionError(HgError):
    """Session and install-flow failures (codes: AppMismatch, UnknownApp,
    BadDecision, StaleFinding, UnknownDecisionId)."""
