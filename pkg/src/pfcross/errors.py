"""Exception types shared by every module.

The CLI maps these to exit codes: precondition/structural -> 2,
resource -> 3, invariant -> 4.
"""

from __future__ import annotations


class PFError(Exception):
    """Base class for all library errors."""


class PreconditionError(PFError, ValueError):
    """An input violates the documented precondition of an operation."""


class StructuralError(PreconditionError):
    """Operands live in different groups, actions or coefficient algebras."""


class ResourceError(PFError):
    """A projected allocation exceeds the configured element cap."""

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class InvariantViolation(PFError):
    """A checked mathematical invariant failed at runtime."""
