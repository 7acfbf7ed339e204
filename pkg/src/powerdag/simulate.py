"""Synthetic ground-truth graphs, edge weights, and linear-SEM samples.

All generators are pure functions of (spec, seed): identical inputs yield
bit-identical outputs, so simulation across seeds can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .metrics import topological_order

GRAPH_FAMILIES = ("erdos_renyi", "scale_free")

NOISE_FAMILIES = ("gaussian", "exponential", "gumbel")

_NOISE_ALIASES = {
    "gaussian": "gaussian",
    "gauss": "gaussian",
    "normal": "gaussian",
    "exponential": "exponential",
    "exp": "exponential",
    "gumbel": "gumbel",
}

_FAMILY_ALIASES = {
    "erdos_renyi": "erdos_renyi",
    "er": "erdos_renyi",
    "scale_free": "scale_free",
    "sf": "scale_free",
}


def canonical_noise(name: str) -> str:
    try:
        return _NOISE_ALIASES[name.lower()]
    except KeyError:
        raise DomainError(f"unknown noise family: {name!r}") from None


def canonical_family(name: str) -> str:
    try:
        return _FAMILY_ALIASES[name.lower().replace("-", "_")]
    except KeyError:
        raise DomainError(f"unknown graph family: {name!r}") from None


@dataclass
class GraphSpec:
    """Random-graph recipe: d nodes with about degree*d directed edges."""

    nodes: int
    degree: float
    family: str = "erdos_renyi"
    seed: int = 0

    def __post_init__(self):
        self.family = canonical_family(self.family)
        if self.nodes < 2:
            raise DomainError("graph needs at least 2 nodes")
        if self.degree < 1:
            raise DomainError("expected degree factor must be at least 1")


@dataclass
class SemProblem:
    """A ground-truth weighted DAG together with data sampled from it."""

    truth_binary: np.ndarray
    truth_weights: np.ndarray
    data: np.ndarray
    noise_family: str
    seed: int


def gen_dag(spec: GraphSpec) -> np.ndarray:
    """Sample a binary DAG adjacency matrix (entry (i, j) = edge i -> j)."""
    rng = np.random.default_rng(spec.seed)
    d = spec.nodes
    if spec.family == "erdos_renyi":
        # Each unordered pair carries an edge with probability 2k/(d-1)
        # (saturating at 1), oriented down a uniformly random node order.
        p = min(1.0, 2.0 * spec.degree / (d - 1))
        lower = np.tril(rng.random((d, d)) < p, k=-1).astype(np.int64)
        perm = rng.permutation(d)
        adj = np.zeros((d, d), dtype=np.int64)
        adj[np.ix_(perm, perm)] = lower
        return adj
    # scale_free: preferential attachment, each new node emitting up to
    # ``degree`` edges toward existing nodes; new -> existing keeps the
    # graph acyclic by construction.
    k = max(1, int(round(spec.degree)))
    adj = np.zeros((d, d), dtype=np.int64)
    mass = np.zeros(d)
    for new in range(1, d):
        m = min(k, new)
        weights = mass[:new] + 1.0
        chosen = rng.choice(new, size=m, replace=False, p=weights / weights.sum())
        adj[new, chosen] = 1
        mass[chosen] += 1.0
        mass[new] += m
    return adj


def assign_weights(binary, seed: int) -> np.ndarray:
    """Draw edge weights uniformly from [-2, -0.5] union [0.5, 2.0].

    The sign is a fair coin and the magnitude is uniform on [0.5, 2];
    non-edges are exactly zero. Full-matrix draws keep the stream layout
    independent of the edge set.
    """
    b = np.asarray(binary, dtype=np.float64)
    rng = np.random.default_rng(seed)
    magnitude = rng.uniform(0.5, 2.0, size=b.shape)
    sign = np.where(rng.random(b.shape) < 0.5, -1.0, 1.0)
    return b * sign * magnitude


def sample_sem(weights, n: int, noise_family: str, seed: int) -> np.ndarray:
    """Draw n rows from the linear SEM x = W^T x + e over an acyclic W.

    Noise components are i.i.d. at unit scale: standard normal, rate-1
    exponential, or standard Gumbel (location 0, scale 1); the latter two
    are used uncentered. Columns are filled by substitution in topological
    order, so parents are always resolved before their children.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DomainError(f"weight matrix must be square, got shape {w.shape}")
    if n < 1:
        raise DomainError("need at least one sample")
    family = canonical_noise(noise_family)
    order = topological_order((w != 0).astype(np.int64))
    if order is None:
        raise DomainError("weight matrix is cyclic; cannot sample a SEM")

    rng = np.random.default_rng(seed)
    d = w.shape[0]
    if family == "gaussian":
        noise = rng.standard_normal((n, d))
    elif family == "exponential":
        noise = rng.exponential(1.0, size=(n, d))
    else:
        noise = rng.gumbel(0.0, 1.0, size=(n, d))

    x = np.zeros((n, d))
    for j in order:
        x[:, j] = x @ w[:, j] + noise[:, j]
    return x


def make_problem(
    family: str,
    nodes: int,
    degree: float,
    noise_family: str,
    samples: int,
    seed: int,
) -> SemProblem:
    """Generate graph, weights, and data from one master seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    graph_seed, weight_seed, noise_seed = (
        int(c.generate_state(1, np.uint64)[0]) for c in children
    )
    spec = GraphSpec(nodes=nodes, degree=degree, family=family, seed=graph_seed)
    binary = gen_dag(spec)
    weights = assign_weights(binary, weight_seed)
    data = sample_sem(weights, samples, noise_family, noise_seed)
    return SemProblem(binary, weights, data, canonical_noise(noise_family), seed)
