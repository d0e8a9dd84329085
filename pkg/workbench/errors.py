"""Error types shared by the workbench engine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class WorkbenchError(Exception):
    code: str
    message: str
    details: Any | None = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class SourceError(WorkbenchError):
    """Raised when a source file has parse or resolution diagnostics."""


class ModelError(WorkbenchError):
    """Raised by model lookups (unknown class, no such method)."""


class UsageError(WorkbenchError):
    """Raised for invalid invocations or configuration."""


class RefactorError(WorkbenchError):
    """Raised when a refactoring cannot be checked or applied."""


class DerivationError(WorkbenchError):
    """Raised when tests cannot be derived for a class."""


@dataclass
class ScriptBlocked(WorkbenchError):
    index: int = 0
    reports: list = field(default_factory=list)


@dataclass
class EvalError(Exception):
    """OCL evaluation failure; distinct from a Bool(false) result."""

    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass
class RuntimeFault(Exception):
    """Interpreter failure during instantiation or a call."""

    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"
