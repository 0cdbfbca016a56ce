"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so the CLI can
map them to different exit codes.
"""


class ActiveFluxError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ActiveFluxError, ValueError):
    """Invalid user input: unknown scheme, bad profile, malformed network."""


class UnsupportedBoundaryError(ConfigurationError):
    """The selected scheme cannot be run with the requested boundary."""


class NumericalError(ActiveFluxError, ArithmeticError):
    """A linear system could not be solved reliably."""


class SingularCflError(NumericalError):
    """The time-interpolation problem of a stencil is singular at this CFL."""

    def __init__(self, mask, c: float, condition_number: float):
        self.mask = mask
        self.c = c
        self.condition_number = condition_number
        super().__init__(
            f"interpolation system for mask {mask} is singular at c={c:.17g} "
            f"(condition number {condition_number:.3g})"
        )


class SingularSymbolError(NumericalError):
    """The implicit Fourier symbol A(beta) is not invertible."""


class SingularCouplingError(NumericalError):
    """The junction reconstruction has a pole at this CFL number."""
