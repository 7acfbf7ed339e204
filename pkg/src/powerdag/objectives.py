"""Differentiable data-fit losses for the two learning pipelines.

Both losses are pure formulas in (X, B); self-loop exclusion (a hard-zero
diagonal) is enforced by the solvers on their iterates, keeping the analytic
gradients here exact for finite-difference checking in every coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericOverflowError, ShapeError
from .matcore import lu_solve_logabsdet


@dataclass
class LossEval:
    value: float
    gradient: np.ndarray


def _check_shapes(x, b):
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.ndim != 2 or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ShapeError(f"expected data (n, d) and square b, got {x.shape} and {b.shape}")
    if x.shape[1] != b.shape[0]:
        raise ShapeError(f"data has {x.shape[1]} columns but b is {b.shape[0]} x {b.shape[0]}")
    return x, b


def _finished(value: float, gradient: np.ndarray) -> LossEval:
    if not (np.isfinite(value) and np.isfinite(gradient).all()):
        raise NumericOverflowError("loss evaluation overflowed to non-finite values")
    return LossEval(float(value), gradient)


def least_squares(x, b, normalized: bool = True) -> LossEval:
    """Squared-residual fit of the regression X ~ X B.

    With ``normalized`` (the default) the value is ||X - XB||_F^2 / (2n) and
    the gradient -X^T (X - XB) / n, the scaling the standard penalty
    schedules assume; otherwise the raw squared Frobenius norm is returned.
    """
    x, b = _check_shapes(x, b)
    n = x.shape[0]
    resid = x - x @ b
    scale = 1.0 / n if normalized else 2.0
    value = 0.5 * scale * float(np.sum(resid * resid))
    gradient = -scale * (x.T @ resid)
    return _finished(value, gradient)


def golem_likelihood(x, b) -> LossEval:
    """Equal-variance Gaussian log-likelihood score.

    value    = (d/2) log ||X - XB||_F^2 - log |det(I - B)|
    gradient = -d X^T (X - XB) / ||X - XB||_F^2 + ((I - B)^{-1})^T

    Raises a singularity error when I - B is not invertible and a domain
    error when the residual vanishes identically (undefined log).
    """
    x, b = _check_shapes(x, b)
    d = b.shape[0]
    resid = x - x @ b
    rss = float(np.sum(resid * resid))
    if rss == 0.0:
        raise DomainError("residual is identically zero; log-likelihood undefined")
    inverse, logabsdet, _sign = lu_solve_logabsdet(np.eye(d) - b)
    value = 0.5 * d * np.log(rss) - logabsdet
    gradient = -(d / rss) * (x.T @ resid) + inverse.T
    return _finished(value, gradient)
