"""End-to-end learning pipelines over the acyclicity constraints.

``solve_notears`` minimizes a penalized least-squares objective under a
growing quadratic penalty with multiplier updates; ``solve_golem`` minimizes
a likelihood score with a fixed soft constraint weight by adaptive
first-order steps. Either accepts any constraint family by name; inside the
pipelines the constraint is always evaluated through the Hadamard-square
chain so gradients are with respect to the signed weight matrix.

Both pipelines keep the diagonal of the iterate hard-zeroed (self-loops are
outside the model class), center the data columns, start from B = 0, and
finish by thresholding small entries and repairing any residual cycles, so
the returned binary graph is always acyclic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

from . import constraints, objectives
from .errors import DivergedError, DomainError, NumericOverflowError, ShapeError
from .metrics import is_acyclic

_HUGE = 1e100


@dataclass
class SolverConfig:
    """Knobs of the penalty-method pipeline."""

    constraint: str = "fast_tmpi"
    eps: float = 1e-6
    l1_eta: float = 0.1
    rho_init: float = 1.0
    rho_max: float = 1e16
    rho_growth: float = 10.0
    progress_ratio: float = 0.25
    h_tol: float = 1e-8
    max_outer: int = 100
    inner_max_iters: int = 1000
    threshold_omega: float = 0.3
    binomial_alpha: float | None = None
    poly_coeffs: Sequence[float] | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if not self.rho_growth > 1:
            raise DomainError("rho_growth must exceed 1")
        if not 0 < self.progress_ratio < 1:
            raise DomainError("progress_ratio must lie in (0, 1)")
        if self.threshold_omega < 0:
            raise DomainError("threshold_omega must be nonnegative")


@dataclass
class GolemConfig:
    """Knobs of the soft-constraint likelihood pipeline."""

    constraint: str = "fast_tmpi"
    eps: float = 1e-6
    eta1: float = 0.02
    eta2: float = 5.0
    step_size: float = 1e-3
    iters: int = 10000
    threshold_omega: float = 0.3
    binomial_alpha: float | None = None
    poly_coeffs: Sequence[float] | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if not (self.eta1 > 0 and self.eta2 > 0):
            raise DomainError("eta1 and eta2 must be positive")
        if not self.step_size > 0:
            raise DomainError("step_size must be positive")
        if self.iters < 0:
            raise DomainError("iters must be nonnegative")
        if self.threshold_omega < 0:
            raise DomainError("threshold_omega must be nonnegative")


@dataclass
class LearnResult:
    b_raw: np.ndarray
    b_thresholded: np.ndarray
    outer_iters: int
    final_h: float
    trace: list[dict] = field(default_factory=list)
    total_matmuls: int = 0
    wall_time_s: float = 0.0


@dataclass
class InnerResult:
    b: np.ndarray
    converged: bool
    line_search_failed: bool
    n_iters: int


def inner_solve(
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]],
    b0: np.ndarray,
    l1_weight: float = 0.0,
    max_iters: int = 1000,
    pg_tol: float = 1e-8,
    fix_diagonal: bool = False,
    callback: Callable[[np.ndarray], None] | None = None,
    ftol: float = 1e-10,
) -> InnerResult:
    """Limited-memory quasi-Newton descent on the split B = P - N, P, N >= 0.

    The split turns an l1 penalty into the linear term l1_weight * sum(P + N)
    over box-constrained variables, handled by L-BFGS-B with projection onto
    the nonnegative orthant. Stops at ``max_iters`` iterations or when the
    projected gradient's infinity norm reaches ``pg_tol``; ``ftol`` is a
    flat-progress guard for ill-conditioned subproblems where neither stop
    is reachable. A line-search failure is reported on the result rather
    than raised; the best iterate found is still returned. Probe points
    where the objective overflows get a large finite surrogate value so the
    line search retreats.
    """
    b0 = np.asarray(b0, dtype=np.float64)
    d = b0.shape[0]
    dd = d * d

    def fg(w: np.ndarray):
        bmat = (w[:dd] - w[dd:]).reshape(d, d)
        try:
            value, grad = objective(bmat)
        except NumericOverflowError:
            return _HUGE, np.zeros_like(w)
        if not (np.isfinite(value) and np.isfinite(grad).all()):
            return _HUGE, np.zeros_like(w)
        obj = value + l1_weight * float(w.sum())
        g = np.concatenate(((grad + l1_weight).ravel(), (l1_weight - grad).ravel()))
        return obj, g

    pos = np.clip(b0, 0.0, None).ravel()
    neg = np.clip(-b0, 0.0, None).ravel()
    w0 = np.concatenate((pos, neg))
    if fix_diagonal:
        diag = np.arange(0, dd, d + 1)
        bound_lo = np.zeros(2 * dd)
        bound_hi = np.full(2 * dd, np.inf)
        bound_hi[diag] = 0.0
        bound_hi[dd + diag] = 0.0
        w0[diag] = 0.0
        w0[dd + diag] = 0.0
        bounds = np.column_stack((bound_lo, bound_hi))
    else:
        bounds = [(0.0, None)] * (2 * dd)

    scipy_callback = None
    if callback is not None:
        scipy_callback = lambda w: callback((w[:dd] - w[dd:]).reshape(d, d))  # noqa: E731

    sol = scipy.optimize.minimize(
        fg,
        w0,
        method="L-BFGS-B",
        jac=True,
        bounds=bounds,
        callback=scipy_callback,
        options={"maxiter": max_iters, "gtol": pg_tol, "ftol": ftol},
    )
    b = (sol.x[:dd] - sol.x[dd:]).reshape(d, d)
    return InnerResult(
        b=b,
        converged=bool(sol.status == 0),
        line_search_failed=bool(sol.status == 2),
        n_iters=int(sol.nit),
    )


def threshold_and_repair(b, omega: float) -> np.ndarray:
    """Binarize by |entry| >= omega, then delete cycle edges until acyclic.

    Repair removes the smallest-|weight| edge that sits on some cycle,
    repeatedly; ties break on row-major position, keeping the output
    deterministic.
    """
    if omega < 0:
        raise DomainError("threshold must be nonnegative")
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {b.shape}")
    est = (np.abs(b) >= omega).astype(np.int64)
    mag = np.abs(b)
    while not is_acyclic(est):
        worst = None
        for i, j in zip(*np.nonzero(est)):
            if i == j or _reaches(est, j, i):
                key = (mag[i, j], int(i), int(j))
                if worst is None or key < worst:
                    worst = key
        est[worst[1], worst[2]] = 0
    return est


def _reaches(adj: np.ndarray, src: int, dst: int) -> bool:
    """Is there a directed path src -> ... -> dst in the 0/1 matrix?"""
    seen = np.zeros(adj.shape[0], dtype=bool)
    stack = [src]
    seen[src] = True
    while stack:
        u = stack.pop()
        if adj[u, dst]:
            return True
        for v in np.nonzero(adj[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return False


def _prepare(x) -> tuple[np.ndarray, int, int]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"data must be (n, d) with n >= 1, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise DomainError("data contains non-finite values")
    return x - x.mean(axis=0, keepdims=True), x.shape[0], x.shape[1]


def solve_notears(x, cfg: SolverConfig) -> LearnResult:
    """Penalty-method pipeline: least squares + l1 under a hard constraint.

    Each outer iteration minimizes

        loss(B) + l1_eta ||B||_1 + (rho/2) h(B*B)^2 + alpha h(B*B)

    by an inner quasi-Newton solve warm-started at the current iterate. When
    the constraint value fails to shrink to ``progress_ratio`` times its
    previous value, rho grows and the inner solve is retried; otherwise the
    iterate is accepted and the multiplier takes the step alpha += rho * h.
    Terminates at h <= h_tol, rho reaching rho_max, or max_outer iterations,
    then thresholds and repairs the estimate into a DAG.
    """
    started = time.perf_counter()
    xc, _n, d = _prepare(x)
    h_fn = constraints.build_evaluator(
        cfg.constraint,
        d,
        eps=cfg.eps,
        binomial_alpha=cfg.binomial_alpha,
        poly_coeffs=cfg.poly_coeffs,
    )

    b = np.zeros((d, d))
    rho = cfg.rho_init
    alpha = 0.0
    h_val = np.inf
    trace_rows: list[dict] = []
    total_matmuls = 0
    outer_done = 0

    for outer in range(1, cfg.max_outer + 1):
        matmuls_outer = 0

        while True:
            tally = [0]

            def penalized(bmat, _rho=rho, _alpha=alpha, _tally=tally):
                loss = objectives.least_squares(xc, bmat)
                ev = constraints.chain_hadamard(h_fn, bmat)
                _tally[0] += ev.matmuls
                value = loss.value + 0.5 * _rho * ev.value**2 + _alpha * ev.value
                grad = loss.gradient + (_rho * ev.value + _alpha) * ev.gradient
                return value, grad

            res = inner_solve(
                penalized,
                b,
                l1_weight=cfg.l1_eta,
                max_iters=cfg.inner_max_iters,
                fix_diagonal=True,
            )
            matmuls_outer += tally[0]
            if not np.isfinite(res.b).all():
                raise DivergedError("inner solve produced non-finite weights", trace_rows)
            ev_new = constraints.chain_hadamard(h_fn, res.b)
            matmuls_outer += ev_new.matmuls
            if not np.isfinite(ev_new.value):
                raise DivergedError("constraint value diverged", trace_rows)
            needs_more_penalty = ev_new.value > cfg.progress_ratio * h_val
            # rho * growth > rho rules out a pinned rho of zero, which would
            # escalate forever without changing the subproblem
            if needs_more_penalty and rho < cfg.rho_max and rho * cfg.rho_growth > rho:
                rho *= cfg.rho_growth
                continue
            break

        b = res.b
        h_val = ev_new.value
        alpha += rho * h_val
        loss_now = objectives.least_squares(xc, b).value
        if not np.isfinite(loss_now):
            raise DivergedError("loss diverged at accepted iterate", trace_rows)
        total_matmuls += matmuls_outer
        trace_rows.append(
            {
                "iter": outer,
                "loss": loss_now,
                "h": h_val,
                "rho": rho,
                "alpha": alpha,
                "k_used": ev_new.order_used,
                "matmuls": matmuls_outer,
            }
        )
        outer_done = outer
        if h_val <= cfg.h_tol or rho >= cfg.rho_max:
            break

    b_raw = b.copy()
    np.fill_diagonal(b_raw, 0.0)
    return LearnResult(
        b_raw=b_raw,
        b_thresholded=threshold_and_repair(b_raw, cfg.threshold_omega),
        outer_iters=outer_done,
        final_h=float(h_val),
        trace=trace_rows,
        total_matmuls=total_matmuls,
        wall_time_s=time.perf_counter() - started,
    )


def solve_golem(x, cfg: GolemConfig) -> LearnResult:
    """Soft-constraint likelihood pipeline with adaptive first-order steps.

    Minimizes likelihood + eta1 ||B||_1 + eta2 h(B*B) from B = 0 for
    ``iters`` steps of Adam at a fixed base step size, taking the l1 term by
    subgradient (sign at nonzero entries, zero at zero). The diagonal stays
    hard-zeroed. A step landing where I - B is singular (or the score
    overflows) is rejected and retried at half the step; persistent
    rejection raises a divergence error carrying the trace so far.
    """
    started = time.perf_counter()
    xc, _n, d = _prepare(x)
    h_fn = constraints.build_evaluator(
        cfg.constraint,
        d,
        eps=cfg.eps,
        binomial_alpha=cfg.binomial_alpha,
        poly_coeffs=cfg.poly_coeffs,
    )

    b = np.zeros((d, d))
    m = np.zeros((d, d))
    v = np.zeros((d, d))
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8

    trace_rows: list[dict] = []
    total_matmuls = 0
    loss_ev = objectives.golem_likelihood(xc, b)

    for t in range(1, cfg.iters + 1):
        h_ev = constraints.chain_hadamard(h_fn, b)
        total_matmuls += h_ev.matmuls
        trace_rows.append(
            {
                "iter": t - 1,
                "loss": loss_ev.value,
                "h": h_ev.value,
                "rho": None,
                "alpha": None,
                "k_used": h_ev.order_used,
                "matmuls": h_ev.matmuls,
            }
        )

        grad = loss_ev.gradient + cfg.eta2 * h_ev.gradient + cfg.eta1 * np.sign(b)
        np.fill_diagonal(grad, 0.0)
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        step = cfg.step_size * m_hat / (np.sqrt(v_hat) + adam_eps)

        scale = 1.0
        while True:
            b_cand = b - scale * step
            np.fill_diagonal(b_cand, 0.0)
            try:
                loss_cand = objectives.golem_likelihood(xc, b_cand)
                break
            except (ArithmeticError, DomainError):
                scale *= 0.5
                if scale < 2.0**-60:
                    raise DivergedError(
                        "step rejected repeatedly near a singular I - B", trace_rows
                    ) from None
        b = b_cand
        loss_ev = loss_cand

    final_ev = constraints.chain_hadamard(h_fn, b)
    total_matmuls += final_ev.matmuls
    b_raw = b.copy()
    np.fill_diagonal(b_raw, 0.0)
    return LearnResult(
        b_raw=b_raw,
        b_thresholded=threshold_and_repair(b_raw, cfg.threshold_omega),
        outer_iters=cfg.iters,
        final_h=float(final_ev.value),
        trace=trace_rows,
        total_matmuls=total_matmuls,
        wall_time_s=time.perf_counter() - started,
    )
