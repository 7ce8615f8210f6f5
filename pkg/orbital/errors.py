"""Exception hierarchy shared by every orbital module."""

from __future__ import annotations

from typing import Any, Optional


class OrbitalError(RuntimeError):
    """Root of all errors raised by the orbital toolkit."""


class InvalidGroupElementError(OrbitalError, ValueError):
    """Raised when a matrix does not have a unit determinant in its ring."""


class UnsupportedRingError(OrbitalError):
    """Raised when an operation is undefined for the given coefficient ring or prime."""


class DomainError(OrbitalError, ValueError):
    """Raised when arithmetic input violates an operation's precondition."""


class CRTError(DomainError):
    """Raised when moduli handed to the Chinese remainder helpers are not pairwise coprime."""


class ResourceCapError(OrbitalError):
    """Raised when an enumeration would exceed its configured cap."""

    def __init__(self, message: str, size: int = 0, cap: int = 0) -> None:
        super().__init__(f"{message} (size {size} > cap {cap})" if cap else message)
        self.size = size
        self.cap = cap


class ContractViolationError(OrbitalError):
    """Raised when a weight function is not relatively invariant; carries a witness."""

    def __init__(self, message: str, witness: Optional[Any] = None) -> None:
        super().__init__(message)
        self.witness = witness


class OracleInconclusiveError(OrbitalError):
    """Raised when the BFS oracle exhausts its visit budget."""


class ClassificationError(OrbitalError):
    """Raised when orbit-closure tables put two orbit types in one orbit."""


class VerificationError(OrbitalError):
    """Raised when a verification report contains failing cells."""
