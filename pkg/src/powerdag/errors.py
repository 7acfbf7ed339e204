"""Exception types shared across the package."""


class PowerDagError(Exception):
    """Base class for all package errors."""


class ShapeError(PowerDagError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class DomainError(PowerDagError, ValueError):
    """An input violates a documented precondition (sign, range, feasibility)."""


class SingularMatrixError(PowerDagError, ArithmeticError):
    """A matrix is singular within the pivot tolerance; no inverse is returned."""


class NumericOverflowError(PowerDagError, ArithmeticError):
    """An operation produced non-finite values from finite inputs."""


class DivergedError(PowerDagError, RuntimeError):
    """A solve left the region where the objective is finite and defined.

    Carries the per-iteration trace accumulated up to the failure so callers
    can persist partial diagnostics.
    """

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
