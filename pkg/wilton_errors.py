"""
Exception hierarchy for the Wilton ripple toolkit.

Every error carries a developer-facing message, optional suggestions for the
person running the tool, and an exit code used by the command-line front end.
"""

from typing import Any, Dict, List, Optional


class WiltonError(Exception):
    """Base exception for all toolkit failures"""

    exit_code = 3

    def __init__(self, message: str, suggestions: Optional[List[str]] = None,
                 details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.suggestions = suggestions or []
        self.details = details or {}
        super().__init__(self.message)


# ============================================================================
# USAGE ERRORS (exit 2)
# ============================================================================

class InvalidParameterError(WiltonError):
    """Bad K, empty ranges, malformed flags or environment overrides"""
    exit_code = 2


# ============================================================================
# NUMERICAL ERRORS (exit 3)
# ============================================================================

class ModeMismatchError(WiltonError):
    """Series with different scalar backends were combined"""


class NotInRangeError(WiltonError):
    """A series handed to the complement inverse still carries kernel modes"""


class NearResonanceError(WiltonError):
    """A divisor c0 + symbol(k) vanishes (or nearly vanishes) off the kernel"""

    def __init__(self, message: str, mode: int, divisor: Any, **kwargs):
        super().__init__(message, **kwargs)
        self.mode = mode
        self.divisor = divisor


class ResonanceError(WiltonError):
    """A Stokes solve was requested at a resonant beta"""


class ModeUnsupportedError(WiltonError):
    """Exact arithmetic was requested for a branch with irrational constants"""


class DegenerateBranchError(WiltonError):
    """The hierarchy could not determine its unknowns at some order"""

    def __init__(self, message: str, order: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.order = order


class InconclusiveOrderError(WiltonError):
    """No nonzero cos(Kx) coefficient appeared up to the computed order"""


class FailedOrderError(WiltonError):
    """A measured convergence order fell below its contract"""

    def __init__(self, message: str, slope: float, amplitudes: List[float],
                 residuals: List[float], **kwargs):
        super().__init__(message, **kwargs)
        self.slope = slope
        self.amplitudes = amplitudes
        self.residuals = residuals


class DivergedError(WiltonError):
    """Newton iteration did not reach the requested tolerance"""

    def __init__(self, message: str, last_residual: float, **kwargs):
        super().__init__(message, **kwargs)
        self.last_residual = last_residual


class SingularSystemError(WiltonError):
    """A linear solve hit a singular matrix"""


class BranchLostError(WiltonError):
    """Continuation step size underflowed before reaching the target amplitude"""

    def __init__(self, message: str, a: float, **kwargs):
        super().__init__(message, **kwargs)
        self.a = a


class MismatchError(WiltonError):
    """A solve result and an expansion describe different waves"""


class OutputError(WiltonError):
    """An output file could not be written"""

    def __init__(self, message: str, path: str, **kwargs):
        super().__init__(message, **kwargs)
        self.path = path


# ============================================================================
# VALIDATION FAILURES (exit 1)
# ============================================================================

class ValidationFailedError(WiltonError):
    """At least one acceptance row failed"""
    exit_code = 1
