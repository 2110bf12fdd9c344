"""Exception hierarchy for the feedback lab."""

from typing import Optional


class FeedbackLabError(Exception):
    """Base class for every error raised by the lab."""


class ConfigError(FeedbackLabError, ValueError):
    """Configuration file could not be parsed or validated."""


class DimensionMismatch(FeedbackLabError, ValueError):
    """Arrays of incompatible shape were combined."""


class MessageRangeError(FeedbackLabError, ValueError):
    """Message index outside 1..M."""


class ChannelError(FeedbackLabError, ValueError):
    """Invalid channel description."""


class _RootError(ChannelError):
    kind = "root"

    def __init__(self, root: complex, modulus: float, message: Optional[str] = None):
        self.root = complex(root)
        self.modulus = float(modulus)
        text = message or (
            f"{self.kind} root {self._format_root(self.root)} has modulus "
            f"{self.modulus:.12g} (must be <= 1 - 1e-9)"
        )
        super().__init__(text)

    @staticmethod
    def _format_root(root: complex) -> str:
        if abs(root.imag) < 1e-15:
            return f"{root.real:.12g}"
        return f"{root.real:.12g}{root.imag:+.12g}j"


class NotMinimumPhase(_RootError):
    """Numerator polynomial of the noise filter has a root on or outside the unit circle."""

    kind = "numerator"


class NotStable(_RootError):
    """Denominator polynomial of the noise filter has a root on or outside the unit circle."""

    kind = "denominator"


class NotInvertible(ChannelError):
    """State-space system with zero feedthrough cannot be inverted."""


class EncoderError(FeedbackLabError, ValueError):
    """Invalid message-carrying encoder."""


class NotObservable(EncoderError):
    """(A, C') pair fails the observability test."""

    def __init__(self, sigma_min: float, sigma_max: float):
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        super().__init__(
            f"(A, C') is not observable: smallest singular value {self.sigma_min:.3e} "
            f"<= 1e-9 * largest ({self.sigma_max:.3e})"
        )


class AssumptionA2Violated(EncoderError):
    """Encoder has an eigenvalue on the unit circle or shared with the channel."""

    def __init__(self, message: str, eigenvalue: Optional[complex] = None,
                 other: Optional[complex] = None):
        self.eigenvalue = eigenvalue
        self.other = other
        super().__init__(message)


class NumericalError(FeedbackLabError, ArithmeticError):
    """A numerical procedure failed."""


class NoConvergence(NumericalError):
    """Iteration did not reach its tolerance."""

    def __init__(self, iterations: int, residual: float, what: str = "Riccati iteration"):
        self.iterations = int(iterations)
        self.residual = float(residual)
        super().__init__(
            f"{what} did not converge after {self.iterations} iterations "
            f"(last residual {self.residual:.3e})"
        )


class SingularSylvester(NumericalError):
    """Sylvester operator is (numerically) singular."""


class NotPSD(NumericalError):
    """Matrix expected to be positive (semi)definite is not."""

    def __init__(self, min_eigenvalue: float, message: Optional[str] = None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(message or f"matrix is not positive semidefinite "
                                    f"(smallest eigenvalue {self.min_eigenvalue:.3e})")


class DegenerateCovariance(NumericalError):
    """A conditional covariance vanished where a positive value is required."""
