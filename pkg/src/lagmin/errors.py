"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`LagminError`,
which the CLI maps to exit status 2.
"""

from __future__ import annotations


class LagminError(Exception):
    """Base class for structural errors."""


class InvalidInputError(LagminError, ValueError):
    """Input data is malformed (non-finite entries, off-quadric points, ...)."""


class InvalidParameterError(InvalidInputError):
    """A family parameter is outside its admissible range."""


class InvalidCompositionError(InvalidInputError):
    """Ingredients of a construction have inconsistent dimensions."""


class InvalidIngredientError(InvalidInputError):
    """An ingredient violates an invariant the construction relies on."""


class SingularPointError(LagminError):
    """Evaluation hit a point where the requested quantity is undefined."""


class OriginCrossingError(SingularPointError):
    """A planar curve passes through (or too close to) the origin."""


class SingularLocusError(SingularPointError):
    """A surface component vanishes on the requested domain."""


class DegenerateFrameError(SingularPointError):
    """The Jacobian is rank deficient so no oriented frame exists."""


class DegenerateMetricError(DegenerateFrameError):
    """The induced metric is not positive definite."""


class NeedsInteriorError(LagminError):
    """A finite-difference stencil would leave the parameter domain."""


class AmbiguousUnwrapError(LagminError):
    """Consecutive angle samples jump by (almost exactly) pi.

    ``index`` locates the offending sample; refine the sampling there.
    """

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class IntegrationError(LagminError):
    """The adaptive integrator could not proceed.

    ``last_time`` is the last time reached with a valid state.
    """

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


class TrajectoryTruncatedError(LagminError):
    """An ODE-defined object left its chart before the requested end time.

    The truncated object is still usable and is attached as ``result``.
    """

    def __init__(self, message: str, result=None, last_time: float | None = None):
        super().__init__(message)
        self.result = result
        self.last_time = last_time


class OriginApproachError(TrajectoryTruncatedError, OriginCrossingError):
    """A constant-A trajectory came within the cutoff radius of the origin."""


class CoordinateDegeneracyError(TrajectoryTruncatedError):
    """A coordinate of a Legendrian ODE solution vanished."""


class NeedsMoreIntegrationError(LagminError):
    """The stored trajectory is too short for the requested analysis."""

    def __init__(self, message: str, suggested_length: float):
        super().__init__(message)
        self.suggested_length = suggested_length


class UnsupportedProvenanceError(LagminError):
    """No closed-form prediction exists for this immersion."""


class RecipeError(LagminError):
    """A recipe file or preset string could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column
