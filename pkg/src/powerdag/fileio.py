"""CSV and JSON readers/writers with exact-precision round trips.

Floats are written with 17 significant digits (``%.17g``) so every value
parses back bit-identically; all writers emit deterministic bytes for fixed
inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DomainError


def write_data_csv(path, x) -> None:
    """n x d sample matrix with header X1,...,Xd."""
    x = np.asarray(x, dtype=np.float64)
    header = ",".join(f"X{j + 1}" for j in range(x.shape[1]))
    np.savetxt(path, x, fmt="%.17g", delimiter=",", header=header, comments="")


def read_data_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
    if not header.startswith("X1"):
        raise DomainError(f"{path}: expected an X1,...,Xd header, got {header[:40]!r}")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_matrix_csv(path, m, integer: bool = False) -> None:
    """d x d matrix, no header; entry (i, j) is the weight of edge i -> j."""
    m = np.asarray(m)
    np.savetxt(path, m, fmt="%d" if integer else "%.17g", delimiter=",")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_jsonl(path, rows) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out
