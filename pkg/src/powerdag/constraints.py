"""Differentiable acyclicity functions over nonnegative square matrices.

Every public ``h_*`` function evaluates one acyclicity measure h(Bt) on a
nonnegative candidate matrix Bt (typically Bt = B * B for a signed weight
matrix B) and returns the value together with its analytic gradient, the
largest power order whose trace contributes to the value, and the number of
square matrix products spent.

Families
--------
h_geo        plain power series tr(Bt + Bt^2 + ... + Bt^d)
h_trunc      the same series cut at a fixed order k
h_tmpi       adaptive truncation: accumulate powers until the current power's
             max-norm drops to eps, or the order reaches d
h_fast_tmpi  the same quantity grown by order doubling, O(log k) products
h_exp_taylor factorially damped series (d-term truncation of the matrix
             exponential trace)
h_binomial   tr((I + alpha*Bt)^d) - d via exponentiation by squaring
h_poly       arbitrary positive per-order coefficients
h_single     entry sum of Bt^d alone

All evaluations are pure and reentrant; scratch state lives on the stack of
each call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericOverflowError
from .matcore import MatMulCounter, as_matrix, matmul


@dataclass
class ConstraintEval:
    """Result of one acyclicity-function evaluation.

    value      nonnegative scalar, zero exactly on acyclic candidates
    gradient   d x d array, already oriented as the gradient w.r.t. the input
    order_used largest power index whose trace contributes to ``value``
    matmuls    square matrix-matrix products spent in this evaluation
    """

    value: float
    gradient: np.ndarray
    order_used: int
    matmuls: int


ConstraintFn = Callable[[np.ndarray], ConstraintEval]

CONSTRAINT_NAMES = ("tmpi", "fast_tmpi", "geo", "exp", "binomial", "poly", "single")


def _as_nonneg(bt, name: str = "candidate") -> np.ndarray:
    out = as_matrix(bt, square=True, name=name)
    if np.min(out) < 0.0:
        raise DomainError(f"{name} must be entrywise nonnegative")
    return out


def _finished(value: float, gradient: np.ndarray, order: int, counter: MatMulCounter) -> ConstraintEval:
    if not (np.isfinite(value) and np.isfinite(gradient).all()):
        raise NumericOverflowError("constraint evaluation overflowed to non-finite values")
    return ConstraintEval(float(value), gradient, order, counter.count)


def h_trunc(bt: np.ndarray, k: int) -> ConstraintEval:
    """Power series truncated at a fixed order k, 1 <= k <= d.

    value    = sum_{i=1}^{k} tr(Bt^i)
    gradient = sum_{i=0}^{k-1} (i+1) (Bt^i)^T

    A single power chain feeds both sums, so the cost is k - 1 products.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    if not 1 <= k <= d:
        raise DomainError(f"truncation order must lie in [1, {d}], got {k}")
    counter = MatMulCounter()
    value = float(np.trace(bt))
    gradient = np.eye(d)
    power = bt
    for i in range(2, k + 1):
        gradient = gradient + i * power.T
        power = matmul(bt, power, counter)
        value += float(np.trace(power))
    return _finished(value, gradient, k, counter)


def h_geo(bt: np.ndarray) -> ConstraintEval:
    """Full geometric power series: h_trunc at order d."""
    bt = _as_nonneg(bt)
    return h_trunc(bt, bt.shape[0])


def h_tmpi(bt: np.ndarray, eps: float = 1e-6) -> ConstraintEval:
    """Truncated power iteration with a data-driven stopping order.

    Accumulates tr(Bt^i) into the value and i*(Bt^{i-1})^T into the gradient,
    stopping after the first order whose power has max-norm at most ``eps``,
    or once the order reaches d. The term at the stopping order is included.
    """
    bt = _as_nonneg(bt)
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    d = bt.shape[0]
    counter = MatMulCounter()
    value = float(np.trace(bt))
    gradient = np.eye(d)
    power = bt
    order = 1
    i = 2
    while i <= d:
        gradient = gradient + i * power.T
        power = matmul(bt, power, counter)
        value += float(np.trace(power))
        order = i
        if np.max(np.abs(power)) <= eps:
            break
        i += 1
    return _finished(value, gradient, order, counter)


def h_fast_tmpi(bt: np.ndarray, eps: float = 1e-6) -> ConstraintEval:
    """Order-doubling variant of :func:`h_tmpi`, O(log k) matrix products.

    Maintains f_i = Bt + ... + Bt^i, its trace gradient, and the power Bt^i,
    doubling i via

        f_2i      = f_i + Bt^i f_i
        grad_2i   = grad_i + (Bt^i)^T grad_i + i (f_2i - f_i + Bt^i - Bt^2i)^T

    until the current power's max-norm drops to ``eps`` or i exceeds d. The
    final order K is always a power of two and may exceed d; the terms above
    d either vanish exactly (nilpotent input) or sit below the stopping
    tolerance, and the reported ``order_used`` is K.
    """
    bt = _as_nonneg(bt)
    if not eps > 0.0:
        raise DomainError("eps must be positive")
    d = bt.shape[0]
    counter = MatMulCounter()
    f = bt.copy()
    gradient = np.eye(d)
    power = bt
    order = 1
    i = 1
    while i <= d:
        f_old = f
        power_old = power
        f = f_old + matmul(power_old, f_old, counter)
        power = matmul(power_old, power_old, counter)
        gradient = (
            gradient
            + matmul(power_old.T, gradient, counter)
            + i * (f - f_old + power_old - power).T
        )
        order = 2 * i
        if np.max(np.abs(power)) <= eps:
            break
        i *= 2
    return _finished(float(np.trace(f)), gradient, order, counter)


def h_exp_taylor(bt: np.ndarray) -> ConstraintEval:
    """Factorially damped power series, truncated at order d.

    value    = sum_{i=1}^{d} tr(Bt^i) / i!
    gradient = sum_{i=1}^{d} (Bt^{i-1})^T / (i-1)!
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    counter = MatMulCounter()
    value = float(np.trace(bt))
    gradient = np.eye(d)
    power = bt
    fact = 1.0  # (i-1)! inside the loop
    for i in range(2, d + 1):
        fact *= i - 1
        gradient = gradient + power.T / fact
        power = matmul(bt, power, counter)
        value += float(np.trace(power)) / (fact * i)
    return _finished(value, gradient, d, counter)


def _matrix_power(m: np.ndarray, e: int, counter: MatMulCounter) -> np.ndarray:
    """m**e by binary exponentiation, e >= 0."""
    if e == 0:
        return np.eye(m.shape[0])
    result = None
    base = m
    while True:
        if e & 1:
            result = base if result is None else matmul(result, base, counter)
        e >>= 1
        if e == 0:
            return result
        base = matmul(base, base, counter)


def h_binomial(bt: np.ndarray, alpha: float | None = None) -> ConstraintEval:
    """Binomial acyclicity function tr((I + alpha*Bt)^d) - d.

    ``alpha`` defaults to 1/d. Powers are formed by exponentiation by
    squaring, so the cost is O(log d) products; the gradient reuses the
    (d-1)-th power: d * alpha * ((I + alpha*Bt)^{d-1})^T.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    if alpha is None:
        alpha = 1.0 / d
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    counter = MatMulCounter()
    m = np.eye(d) + alpha * bt
    p = _matrix_power(m, d - 1, counter)
    full = matmul(m, p, counter)
    value = float(np.trace(full)) - d
    gradient = (d * alpha) * p.T
    return _finished(value, gradient, d, counter)


def h_poly(bt: np.ndarray, coeffs: Sequence[float]) -> ConstraintEval:
    """General positive-coefficient power series tr(sum_i c_i Bt^i).

    ``coeffs`` supplies c_1..c_d; all must be positive. Coefficients 1/i!
    reproduce :func:`h_exp_taylor`, binomial coefficients times alpha^i
    reproduce :func:`h_binomial`, and all-ones reproduces :func:`h_geo`.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 1 or c.shape[0] != d:
        raise DomainError(f"expected {d} coefficients, got shape {c.shape}")
    if not np.isfinite(c).all() or np.min(c) <= 0.0:
        raise DomainError("all coefficients must be positive and finite")
    counter = MatMulCounter()
    value = c[0] * float(np.trace(bt))
    gradient = c[0] * np.eye(d)
    power = bt
    for i in range(2, d + 1):
        gradient = gradient + (i * c[i - 1]) * power.T
        power = matmul(bt, power, counter)
        value += c[i - 1] * float(np.trace(power))
    return _finished(value, gradient, d, counter)


def h_single(bt: np.ndarray) -> ConstraintEval:
    """Entry sum of Bt^d (the elementwise l1 norm for nonnegative input).

    The value and gradient come from cached vector chains u_j = (Bt^T)^j 1
    and v_j = Bt^j 1, so only matrix-vector products are needed besides one
    stacked product assembling the gradient

        grad = sum_{j=0}^{d-1} u_j v_{d-1-j}^T.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    counter = MatMulCounter()
    ones = np.ones(d)
    fwd = np.empty((d, d))
    bwd = np.empty((d, d))
    u = ones.copy()
    v = ones.copy()
    for j in range(d):
        fwd[j] = u
        bwd[j] = v
        u = bt.T @ u
        v = bt @ v
    value = float(u @ ones)
    gradient = matmul(fwd.T, bwd[::-1].copy(), counter)
    return _finished(value, gradient, d, counter)


def chain_hadamard(h: ConstraintFn, b: np.ndarray) -> ConstraintEval:
    """Evaluate ``h`` at B * B and chain the gradient back to signed B.

    grad_B h(B * B) = grad_Bt h(Bt) * 2B, elementwise.
    """
    b = as_matrix(b, square=True, name="weight matrix")
    inner = h(b * b)
    return ConstraintEval(inner.value, inner.gradient * (2.0 * b), inner.order_used, inner.matmuls)


def per_order_gradient_norms(
    bt: np.ndarray,
    family: str,
    max_order: int,
    alpha: float | None = None,
) -> list[float]:
    """Frobenius norms of the per-order gradient terms i * c_i * (Bt^{i-1})^T.

    ``family`` selects the coefficients: ``geo`` (c_i = 1), ``exp``
    (c_i = 1/i!), or ``binomial`` (c_i = C(d, i) alpha^i, alpha defaulting to
    1/d). The exp-family term is computed as the geo-family term divided by
    a running float factorial, so the i! ratio between the two families is
    exact in floating point.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    if family not in ("geo", "exp", "binomial"):
        raise DomainError(f"unknown family: {family!r}")
    if not 1 <= max_order <= d:
        raise DomainError(f"max_order must lie in [1, {d}], got {max_order}")
    if alpha is None:
        alpha = 1.0 / d
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    counter = MatMulCounter()
    norms: list[float] = []
    power = np.eye(d)  # Bt^{i-1}
    fact = 1.0  # i!
    binc = float(d) * alpha  # C(d, i) alpha^i
    for i in range(1, max_order + 1):
        base = float(np.sqrt(np.sum(power * power)))
        if family == "geo":
            term = i * base
        elif family == "exp":
            fact *= i
            term = (i * base) / fact if np.isfinite(fact) else 0.0
        else:
            term = (i * binc) * base
            binc *= alpha * (d - i) / (i + 1)
        norms.append(term)
        if i < max_order:
            power = bt if i == 1 else matmul(bt, power, counter)
    return norms


def truncation_profile(bt: np.ndarray) -> list[dict]:
    """Per-order truncation diagnostics against the full power series.

    For each k = 1..d returns the max-norm of Bt^k, the value gap
    h_geo - h_trunc^k, and the max-norm of the gradient gap. Uses one power
    chain (d - 1 products) plus a backward sweep over stored powers.
    """
    bt = _as_nonneg(bt)
    d = bt.shape[0]
    counter = MatMulCounter()
    powers = [bt]
    for _ in range(2, d + 1):
        powers.append(matmul(bt, powers[-1], counter))
    traces = [float(np.trace(p)) for p in powers]

    rows: list[dict] = []
    grad_tail = np.zeros((d, d))  # sum_{i=k}^{d-1} (i+1) Bt^i
    value_tail = 0.0  # sum_{i=k+1}^{d} tr(Bt^i)
    tails = [None] * (d + 1)
    tails[d] = (0.0, 0.0)
    for k in range(d - 1, 0, -1):
        value_tail += traces[k]
        grad_tail = grad_tail + (k + 1) * powers[k - 1]
        tails[k] = (value_tail, float(np.max(np.abs(grad_tail))))
    for k in range(1, d + 1):
        vt, gt = tails[k]
        rows.append(
            {
                "k": k,
                "power_infnorm": float(np.max(np.abs(powers[k - 1]))),
                "value_error": vt,
                "grad_error_infnorm": gt,
            }
        )
    return rows


def build_evaluator(
    name: str,
    d: int,
    *,
    eps: float = 1e-6,
    binomial_alpha: float | None = None,
    poly_coeffs: Sequence[float] | None = None,
) -> ConstraintFn:
    """Resolve a constraint-family name to a single-argument evaluator."""
    key = name.replace("-", "_")
    if key == "geo":
        return h_geo
    if key == "tmpi":
        return lambda bt: h_tmpi(bt, eps)
    if key == "fast_tmpi":
        return lambda bt: h_fast_tmpi(bt, eps)
    if key == "exp":
        return h_exp_taylor
    if key == "binomial":
        alpha = binomial_alpha if binomial_alpha is not None else 1.0 / d
        return lambda bt: h_binomial(bt, alpha)
    if key == "poly":
        coeffs = np.ones(d) if poly_coeffs is None else np.asarray(poly_coeffs, dtype=np.float64)
        return lambda bt: h_poly(bt, coeffs)
    if key == "single":
        return h_single
    raise DomainError(f"unknown constraint family: {name!r}")
