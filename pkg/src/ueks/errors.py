"""Exception hierarchy.

The CLI maps these onto exit codes: input problems exit with 2, violated
data assumptions (ties) with 3, numerical non-convergence with 4.
"""


class UEKSError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DomainError(UEKSError, ValueError):
    """Argument outside the domain of the requested function."""


class ParameterError(UEKSError, ValueError):
    """Invalid distribution or kernel parameter."""


class ArityError(UEKSError, ValueError):
    """Kernel called with the wrong number of arguments."""


class RegistryError(UEKSError, KeyError):
    """Unknown test, family or alternative id."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SizeError(UEKSError, ValueError):
    """Enumeration or simulation budget exceeded."""


class PrecisionError(UEKSError, ValueError):
    """Too few Monte Carlo replications for the requested quantity."""


class TieError(UEKSError, ValueError):
    """Duplicate observations; the continuity assumption is violated."""

    exit_code = 3

    def __init__(self, value):
        super().__init__(f"tied observations at value {value!r}")
        self.value = value


class DegeneracyError(UEKSError, ValueError):
    """Variance function vanishes identically."""


class NumericalError(UEKSError, ArithmeticError):
    """Base for non-convergence failures."""

    exit_code = 4


class IntegrationError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class OptimizationError(NumericalError):
    """One-dimensional optimizer failed to bracket or converge."""


class DivergenceError(NumericalError):
    """Kullback-Leibler integral diverges."""


class IndeterminateError(NumericalError):
    """Efficiency ratio with vanishing denominator."""
