"""Exception types shared across the package."""

from __future__ import annotations


class LhvError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(LhvError, ValueError):
    pass


class DomainError(LhvError, ValueError):
    pass


class NotHermitian(LhvError, ValueError):
    def __init__(self, deviation: float):
        self.deviation = float(deviation)
        super().__init__(f"operator is not Hermitian (max deviation {self.deviation:.3e})")


class InvalidPovm(LhvError, ValueError):
    """Raised when a list of operators is not a POVM.

    ``reason`` is one of ``"not-hermitian"``, ``"not-psd"`` or ``"not-complete"``.
    """

    REASONS = ("not-hermitian", "not-psd", "not-complete")

    def __init__(self, reason: str, detail: str = ""):
        if reason not in self.REASONS:
            raise ValueError(f"unknown InvalidPovm reason {reason!r}")
        self.reason = reason
        self.detail = detail
        msg = f"invalid POVM ({reason})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvalidChannel(LhvError, ValueError):
    pass


class ParseError(LhvError, ValueError):
    """Measurement spec could not be read.

    ``line`` is 1-based when known, ``field`` is a dotted path into the document.
    """

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
