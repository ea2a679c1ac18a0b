"""Exception and warning types shared by the numerical modules."""


class RescountError(Exception):
    """Base class for all numerical failures raised by this package."""


class DomainError(RescountError, ValueError):
    """Argument outside the region where a map or expansion is defined."""


class ConvergenceError(RescountError):
    """An iteration did not converge.

    ``last`` holds the final iterate and ``residual`` its residual, so a
    caller can report how far off the solve ended.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class StripEscapeError(ConvergenceError):
    """A resonance iterate left the closed strip it was meant to stay in."""


class QuadratureError(RescountError):
    """Adaptive quadrature ran out of budget before meeting its tolerance."""


class BoundaryZeroError(RescountError):
    """A zero sits too close to an argument-principle contour."""


class NonIntegerError(RescountError):
    """A winding-number integral did not settle near an integer."""


class InsufficientDataError(RescountError, ValueError):
    """A table is too short or too narrow for the requested statistic."""


class DegenerateFitError(RescountError):
    """Residuals are below the counting noise floor; no exponent can be fitted."""


class PrecisionWarning(UserWarning):
    """An asymptotic formula was used below its intended order range."""
