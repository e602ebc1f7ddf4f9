"""Exception types shared across the package.

Every failure mode surfaces as an explicit exception; numerical routines
never let NaN or infinities propagate silently.
"""

from __future__ import annotations


class BarrierFlowError(Exception):
    """Base class for all package errors.

    Drivers that already accumulated trajectory rows attach the partial
    record under ``partial_record`` so callers can persist it.
    """

    partial_record = None


class DomainViolation(BarrierFlowError):
    """A point left the open slack region {x in X : g_i(x) < s} or the set X."""


class InfeasibleStart(BarrierFlowError):
    """The initial point is not strictly inside the slack region."""


class StepCollapse(BarrierFlowError):
    """Integrator step size underflowed while retrying a rejected step."""


class FixedPointDivergence(BarrierFlowError):
    """Implicit-step fixed-point iteration failed to settle."""


class ModeMismatch(BarrierFlowError):
    """A diagnostic valid only for one barrier mode was applied to the other."""


class MaxItersExceeded(BarrierFlowError):
    """Iteration budget exhausted before the tolerance was met.

    ``best`` carries the best point found so far.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DimensionTooLarge(BarrierFlowError):
    """Brute-force grid search is limited to very small dimensions."""


class ConfigError(BarrierFlowError):
    """Bad experiment configuration; message names the offending key."""


class InsufficientData(BarrierFlowError):
    """Not enough usable rows for a rate fit."""
