"""Exception types shared across the package.

Integration halts (blowup, step underflow, exhausted budget) carry the
partial trajectory so callers can recover the solution up to the halt.
"""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class OutOfRange(ValueError):
    """A query point lies outside the solved time or profile range."""


class OutsideRegion(ValueError):
    """A spacetime point violates the validity region of a solution piece."""


class NotPeriodic(ValueError):
    """A period-related operation was invoked on a non-periodic orbit."""


class NoConvergence(RuntimeError):
    """An iterative refinement exhausted its budget before reaching tolerance."""


class NoCompactSupport(ValueError):
    """A profile has no first zero, so no support radius is available."""


class NonRealPower(ValueError):
    """A fractional power of a negative profile value was requested."""


class StencilOutOfDomain(ValueError):
    """A finite-difference stencil arm crossed a validity boundary."""


class MissingGravity(ValueError):
    """A self-gravitating residual was requested on samples without phi_r."""


class IntegrationHalted(RuntimeError):
    """Base for abnormal integrator termination.

    Attributes:
        t: time at which integration stopped.
        trajectory: partial trajectory up to ``t`` (None when no step was
            accepted before the halt).
    """

    def __init__(self, message: str, t: float, trajectory=None):
        super().__init__(message)
        self.t = t
        self.trajectory = trajectory


class StepBudgetExceeded(IntegrationHalted):
    """The configured maximum number of steps was reached."""


class StateBlowup(IntegrationHalted):
    """A state component exceeded the overflow guard (finite-time blowup)."""


class StepUnderflow(IntegrationHalted):
    """The step size collapsed below the relative floor (singularity ahead)."""
