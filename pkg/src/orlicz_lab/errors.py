"""Exception types shared across the package."""


class OrliczLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OrliczLabError):
    """Invalid parameters, fields, or geometry for the requested object."""


class UnsupportedOperationError(OrliczLabError):
    """Operation not available for this family (e.g. derivative of a non-convex function)."""


class BracketError(OrliczLabError):
    """A monotone search bracket could not be established.

    Carries the attempted bracket in ``bracket`` when available.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class WitnessInvalidError(OrliczLabError):
    """Comparability witness has non-finite or out-of-range data."""


class DegenerateComparisonError(OrliczLabError):
    """A ratio of growth functions hit a zero denominator."""


class MeshMismatchError(OrliczLabError):
    """Two fields that must share a mesh do not."""


class GeometryError(OrliczLabError):
    """A ball or compact violates the geometric preconditions of a check."""


class WrongLemmaError(GeometryError):
    """Interior/boundary estimate applied to a ball of the other kind."""


class InfeasibleError(OrliczLabError):
    """The admissible set of an obstacle problem is empty."""


class NonConvergedError(OrliczLabError):
    """A solve hit its iteration cap without meeting its tolerances."""


class UndefinedRatioError(OrliczLabError):
    """Quasiminimizer ratio requested on an empty disagreement set."""


class PreconditionError(OrliczLabError):
    """An operation's stated precondition does not hold for the input."""
