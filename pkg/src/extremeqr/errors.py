"""Exception hierarchy shared by the estimators, selectors and the CLI."""

from __future__ import annotations


class ExtremeQRError(Exception):
    """Base class for all package errors."""


class InvalidBandwidthError(ExtremeQRError, ValueError):
    pass


class EmptyWindowError(ExtremeQRError):
    """No observation receives positive kernel weight at the query point."""

    def __init__(self, x, h):
        super().__init__(f"empty kernel window at x={x!r} with h={h!r}")
        self.x = x
        self.h = h


class DomainError(ExtremeQRError, ValueError):
    pass


class InvalidWeightsError(ExtremeQRError, ValueError):
    pass


class DegenerateSpacingError(ExtremeQRError):
    """A quantile spacing used by the refined Pickands estimator is null.

    ``index`` is the 1-based j of the collapsed spacing
    q(tau_j alpha) - q(tau_{j+1} alpha).
    """

    def __init__(self, index: int, spacings=None):
        super().__init__(f"quantile spacing j={index} collapsed (zero or wrong sign)")
        self.index = index
        self.spacings = spacings


class WindowTooSmallError(ExtremeQRError, ValueError):
    pass


class InsufficientExceedancesError(ExtremeQRError):
    pass


class SelectionError(ExtremeQRError):
    """A data-driven selection rule found no admissible candidate."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class ConfigError(ExtremeQRError, ValueError):
    """Invalid run configuration; ``key`` names the offending parameter."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class DataError(ExtremeQRError, ValueError):
    pass
