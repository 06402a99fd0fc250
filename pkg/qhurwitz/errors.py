"""Exception hierarchy for the quantum Hurwitz engine.

Every error raised by the package derives from :class:`QHurwitzError` so the
command line runner can log it and translate it into an exit code.
"""


class QHurwitzError(Exception):
    """Base class for all engine errors."""

    exit_code = 1

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_dict(self):
        payload = {"error": type(self).__name__, "message": self.message}
        if self.witness is not None:
            payload["witness"] = self.witness
        return payload


class UsageError(QHurwitzError):
    """Invalid command line or configuration input."""

    exit_code = 2


class DivisionByZero(QHurwitzError):
    pass


class NonInvertibleSeries(QHurwitzError):
    """Reciprocal requested of a beta series with zero constant term."""


class WeightMismatch(QHurwitzError):
    """Partitions or profiles of different weights were combined."""


class TooLarge(QHurwitzError):
    """Brute-force enumeration requested beyond the configured cut-off."""


class ZeroColengthProfile(QHurwitzError):
    """A ramification profile with colength zero entered a weight factor."""


class OrderTooSmall(QHurwitzError):
    pass


class PrecisionLoss(QHurwitzError):
    """A truncation or tail estimate exceeded the requested tolerance."""


class VanishingFactor(QHurwitzError):
    """A factor H_q(j beta) or a rho value is too small to divide by."""


class SingularPoint(QHurwitzError):
    pass


class NoConvergence(QHurwitzError):
    """Adaptive summation hit its hard term cap."""


class CoincidentPoints(QHurwitzError):
    """Two eigenvalues are closer than the separation threshold."""


class PoleProximity(QHurwitzError):
    """Argument of H_q is too close to a pole q^(-m)."""


class WrongRegion(QHurwitzError):
    """Asymptotic formula requested outside the left half plane."""


class PolePoint(QHurwitzError):
    """Kernel evaluated on one of its poles."""


class ContourTooShort(QHurwitzError):
    """Integrand still above tolerance at the right truncation cap."""


class NonRealResult(QHurwitzError):
    """Contour integral has an imaginary part above tolerance."""


class CalibrationError(QHurwitzError):
    """No calibration candidate reproduced the reference values."""
