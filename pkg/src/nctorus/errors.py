"""Exception types raised by the library."""


class TorusError(Exception):
    """Base class for all library errors."""


class OutOfBandError(TorusError, IndexError):
    """A lattice index lies outside the truncation window."""


class ThetaMismatchError(TorusError, ValueError):
    """Operands were built for different rotation parameters."""


class BandwidthMismatchError(TorusError, ValueError):
    """Operands live on different truncation windows."""


class StepTooLargeError(TorusError, ValueError):
    """Exponential series argument is too large or not skew-adjoint."""


class UnitarityError(TorusError, ValueError):
    """An element is too far from unitary for the requested operation."""


class HypothesisError(TorusError, ValueError):
    """Inputs do not satisfy the hypotheses of the inequality chain."""


class InvalidEndomorphismError(TorusError, ValueError):
    """Exponent matrix and phases do not define a unital *-endomorphism."""
