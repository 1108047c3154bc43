"""Exception hierarchy shared by every module.

Validation errors map to CLI exit code 2, numerical failures to exit code 1.
"""

from __future__ import annotations


class DeformQMError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        out.update({k: v for k, v in self.details.items()})
        return out


class ValidationError(DeformQMError):
    """Inputs violate a precondition; nothing was computed."""

    exit_code = 2


class ParameterRange(ValidationError):
    pass


class DegenerateRescale(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class NoRealRoot(ValidationError):
    pass


class FactorizationDomain(ValidationError):
    pass


class OverflowRisk(ValidationError):
    pass


class UnsupportedDegree(ValidationError):
    pass


class DomainViolation(ValidationError):
    pass


class InsufficientBoundaryData(ValidationError):
    pass


class LevelOutOfRange(ValidationError):
    pass


class NoBoundStates(ValidationError):
    pass


class NotNormalizable(ValidationError):
    pass


class IndefiniteKinetic(ValidationError):
    pass


class RangeUnsupported(ValidationError):
    pass


class NumericalError(DeformQMError):
    exit_code = 1


class ConvergenceFailure(NumericalError):
    pass


class ValidityWarning(UserWarning):
    """A perturbative result is used outside its comfortable range."""


class SmallParameterWarning(UserWarning):
    """Deformation parameters are larger than the small-parameter regime."""
