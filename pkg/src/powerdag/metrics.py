"""Structure-recovery scoring of an estimated graph against ground truth.

Edge conventions: entry (i, j) = 1 encodes the directed edge i -> j. An
estimated edge is a true positive when the truth has the same direction,
reversed when the truth has only the opposite direction, and a false
positive when the truth has no edge between the pair in either direction.

SHD counts missing truth edges (absent in both directions), false positives,
and reversed edges, with a reversed pair costing one edit. FDR and FPR count
reversed edges together with false positives; FPR's denominator is the
number of unordered pairs carrying no truth edge.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass
class StructMetrics:
    shd: int
    fdr: float
    tpr: float
    fpr: float
    predicted_edges: int

    def to_dict(self) -> dict:
        return asdict(self)


def _as_binary(a, name: str = "graph") -> np.ndarray:
    out = np.asarray(a)
    if out.ndim != 2 or out.shape[0] != out.shape[1] or out.shape[0] < 1:
        raise ShapeError(f"{name} must be a square matrix, got shape {out.shape}")
    out = out.astype(np.float64)
    if not np.isin(out, (0.0, 1.0)).all():
        raise DomainError(f"{name} must contain only 0/1 entries")
    return out.astype(np.int64)


def topological_order(binary) -> list[int] | None:
    """Kahn-style topological sort; None when the graph is cyclic."""
    a = _as_binary(binary)
    d = a.shape[0]
    indeg = a.sum(axis=0)
    ready = [j for j in range(d) if indeg[j] == 0]
    order: list[int] = []
    while ready:
        u = ready.pop()
        order.append(u)
        for v in np.nonzero(a[u])[0]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(int(v))
    return order if len(order) == d else None


def is_acyclic(binary) -> bool:
    return topological_order(binary) is not None


def score(truth, est) -> StructMetrics:
    """Score an estimated binary graph against a binary ground truth."""
    t = _as_binary(truth, "truth")
    e = _as_binary(est, "estimate")
    if t.shape != e.shape:
        raise ShapeError(f"truth and estimate sizes differ: {t.shape} vs {e.shape}")
    if not is_acyclic(t):
        raise DomainError("truth graph is cyclic")
    if not is_acyclic(e):
        raise DomainError("estimated graph is cyclic")

    d = t.shape[0]
    tp = int(np.sum((e == 1) & (t == 1)))
    reversed_ = int(np.sum((e == 1) & (t == 0) & (t.T == 1)))
    fp = int(np.sum((e == 1) & (t == 0) & (t.T == 0)))
    missing = int(np.sum((t == 1) & (e == 0) & (e.T == 0)))

    predicted = int(e.sum())
    truth_edges = int(t.sum())
    nonedge_pairs = d * (d - 1) // 2 - truth_edges

    return StructMetrics(
        shd=missing + fp + reversed_,
        fdr=(reversed_ + fp) / max(1, predicted),
        tpr=tp / max(1, truth_edges),
        fpr=(reversed_ + fp) / max(1, nonedge_pairs),
        predicted_edges=predicted,
    )
