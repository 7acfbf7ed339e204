"""Dense float64 matrix kernels with explicit matrix-product accounting.

All public operations take and return plain 2-D ``numpy.ndarray`` values in
row-major float64. Operations are pure: inputs are never mutated, so arrays
may be shared freely across threads. A :class:`MatMulCounter` is owned by a
single evaluation and tallies square matrix-matrix products, the unit in
which constraint-evaluation complexity is budgeted.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import NumericOverflowError, ShapeError, SingularMatrixError

# Pivots at or below this magnitude are declared singular: downstream
# objectives are undefined at det = 0 and must fail loudly, not return Inf.
PIVOT_TOL = 1e-12


class MatMulCounter:
    """Tally of square matrix-matrix products within one evaluation."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, k: int = 1) -> None:
        self.count += k


def as_matrix(a, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array, validating shape."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2 or out.shape[0] < 1 or out.shape[1] < 1:
        raise ShapeError(f"{name} must be 2-D with positive dimensions, got shape {out.shape}")
    if square and out.shape[0] != out.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise NumericOverflowError(f"{name} contains non-finite entries")
    return out


def matmul(a: np.ndarray, b: np.ndarray, counter: MatMulCounter | None = None) -> np.ndarray:
    """Matrix product ``a @ b``.

    Increments ``counter`` by one when both operands are square of equal
    size (the d x d products that dominate constraint evaluation).
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"incompatible shapes for matmul: {a.shape} x {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = a @ b
    if not np.isfinite(out).all():
        raise NumericOverflowError("matrix product overflowed to non-finite values")
    if counter is not None and a.shape[0] == a.shape[1] == b.shape[1]:
        counter.add()
    return out


def trace(a: np.ndarray) -> float:
    a = as_matrix(a, square=True, name="trace operand")
    return float(np.trace(a))


def norm(a: np.ndarray, kind: str) -> float:
    """Elementwise norms: ``infinity`` (max |entry|), ``frobenius``, ``l1``."""
    a = np.asarray(a, dtype=np.float64)
    if kind in ("infinity", "inf"):
        return float(np.max(np.abs(a)))
    if kind == "frobenius":
        return float(np.sqrt(np.sum(a * a)))
    if kind == "l1":
        return float(np.sum(np.abs(a)))
    raise ShapeError(f"unknown norm kind: {kind!r}")


class LuResult(NamedTuple):
    inverse: np.ndarray
    logabsdet: float
    sign: int


def lu_solve_logabsdet(a: np.ndarray) -> LuResult:
    """Invert ``a`` by LU with partial pivoting, also returning log|det| and sign.

    Raises :class:`SingularMatrixError` when any pivot magnitude falls at or
    below :data:`PIVOT_TOL`.
    """
    a = as_matrix(a, square=True, name="lu operand")
    d = a.shape[0]
    with warnings.catch_warnings():
        # scipy warns on exactly-zero pivots; the tolerance check below
        # turns that case into a typed error.
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.diag(lu)
    if np.min(np.abs(diag)) <= PIVOT_TOL:
        raise SingularMatrixError(f"matrix singular within pivot tolerance {PIVOT_TOL:g}")
    logabsdet = float(np.sum(np.log(np.abs(diag))))
    swaps = int(np.sum(piv != np.arange(d)))
    sign = (-1) ** swaps * int(np.prod(np.sign(diag)))
    inverse = scipy.linalg.lu_solve((lu, piv), np.eye(d), check_finite=False)
    if not np.isfinite(inverse).all():
        raise NumericOverflowError("matrix inverse overflowed to non-finite values")
    return LuResult(inverse, logabsdet, sign)
