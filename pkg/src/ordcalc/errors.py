"""Exception hierarchy shared by all ordcalc modules."""

__all__ = [
    "OrdcalcError",
    "ConfigError",
    "ConvergenceError",
    "OrderingError",
    "NonScalarDifference",
    "VerificationFailure",
    "DivergentIntegral",
    "DegenerateQuadratic",
    "TailBoundError",
    "DivergentUnraveling",
]


class OrdcalcError(Exception):
    """Base class for every error raised by ordcalc."""


class ConfigError(OrdcalcError, ValueError):
    """Invalid truncation, trusted block or tolerance."""


class ConvergenceError(OrdcalcError, ArithmeticError):
    """A matrix exponential or operator series failed to converge."""


class OrderingError(OrdcalcError, ValueError):
    """An ordering cannot be used for the requested operation."""


class NonScalarDifference(OrdcalcError, ArithmeticError):
    """Two ordered squares differ by more than a c-number."""

    def __init__(self, residue):
        self.residue = residue
        super().__init__(f"ordered squares differ by a non-scalar operator: {residue}")


class VerificationFailure(OrdcalcError, AssertionError):
    """A numerical identity check exceeded its tolerance."""

    def __init__(self, message, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(f"{message}: residual {residual:.3e} > tolerance {tolerance:.3e}")


class DivergentIntegral(OrdcalcError, ValueError):
    """The real part of a Gaussian exponent is not negative definite."""


class DegenerateQuadratic(OrdcalcError, ZeroDivisionError):
    """zeta**2 - 4 f g vanishes."""


class TailBoundError(OrdcalcError, ValueError):
    """A quadrature box does not contain enough of the Gaussian mass."""


class DivergentUnraveling(OrdcalcError, ValueError):
    """The unraveled squeeze integral has no decaying Gaussian envelope."""
