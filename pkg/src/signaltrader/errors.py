"""Exception hierarchy.

Every error raised on purpose by the toolkit derives from
:class:`SignalTraderError`.  The CLI maps the three top-level families
(:class:`ConfigError`, :class:`DataError`, :class:`RuntimeFailure`) onto
distinct exit statuses.
"""

from __future__ import annotations


class SignalTraderError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SignalTraderError):
    """Invalid configuration or usage."""


class UsageError(ConfigError):
    """An API or command was called in the wrong order or with no input."""


class DataError(SignalTraderError):
    """Input data cannot be used."""


class SchemaError(DataError):
    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"missing mandatory column {column!r}")


class RowError(DataError):
    """A data row failed to parse; ``row`` is 1-based over data rows."""

    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


class EmptyDatasetError(DataError):
    pass


class InsufficientDataError(DataError):
    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"insufficient data: need at least {required} rows, got {available}"
        )


class DegenerateFeatureError(DataError):
    """Constant column: standardization is undefined."""


class DegenerateLabelsError(DataError):
    """Only one class present where two are required."""


class ShapeError(SignalTraderError, ValueError):
    pass


class DomainError(SignalTraderError, ValueError):
    pass


class RuntimeFailure(SignalTraderError):
    """Numerical or algorithmic failure during a run."""


class DivergenceError(RuntimeFailure):
    def __init__(self, where: str, index: int):
        self.index = index
        super().__init__(f"non-finite loss at {where} {index}")


class StagnationError(RuntimeFailure):
    """Line search could not find a decrease."""


class SweepError(RuntimeFailure):
    """Every window of a sweep was skipped."""


class ConvergenceWarning(UserWarning):
    pass
