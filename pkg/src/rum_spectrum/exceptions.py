"""
Exceptions raised by the rum_spectrum package.

All errors derive from :class:`RumSpectrumError`. Most of them also derive from a builtin
exception (ValueError, ArithmeticError) so callers that only know the builtin types keep working.
"""

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"


class RumSpectrumError(Exception):
    """Base class of all rum_spectrum errors"""


class StructuralError(RumSpectrumError, ValueError):
    """Mismatched group specs, wrong matrix shapes or non-finite entries"""


class ContractViolationError(RumSpectrumError, ArithmeticError):
    """Input violates a mathematical precondition (unitarity, commutation, torsion)"""


class UsageError(RumSpectrumError, ValueError):
    """The operation does not apply to the given input"""


class WindowTooSmallError(UsageError):
    """
    The window does not carry enough margin for the requested operation

    Parameters
    ----------
    message: str
        Human readable description
    required_margin: int
        The number of extra layers the window needs
    """

    def __init__(self, message, required_margin=None):
        super().__init__(message)
        self.required_margin = required_margin


class UnsupportedError(UsageError):
    """The requested operation is not supported for this input (e.g. scan rank)"""


class DegenerateConstraintError(RumSpectrumError, ValueError):
    """A bar has coincident endpoints or a vanishing active direction"""


class NonSmoothPointError(DegenerateConstraintError):
    """The norm is not differentiable at the bar direction"""


class ValidationError(RumSpectrumError, ValueError):
    """A framework or group action does not satisfy its invariants"""


class FrameworkFileError(ValidationError):
    """
    Error in a framework file

    Parameters
    ----------
    message: str
        Description of the problem
    location: str
        JSON-path like location of the offending entry, e.g. ``$.edges[1].gain``
    """

    def __init__(self, message, location="$"):
        self.location = location
        super().__init__(f"{location}: {message}")
