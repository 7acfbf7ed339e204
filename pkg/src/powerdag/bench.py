"""Seeded experiment grids: expansion, parallel execution, aggregation.

A plan is a JSON object with an ``out`` directory and a ``grid`` list. Each
grid cell fixes a graph family, a list of node counts, a degree factor, a
noise family, a sample count, a method, a constraint, and a seed list, plus
optional solver overrides. Every (cell, d, seed) triple becomes one run;
runs execute in parallel across seeds while results are written by the
single parent process in deterministic submission order. A failing run is
recorded in its row and does not abort the grid.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import metrics, simulate, solver
from .errors import DomainError

RESULT_FIELDS = [
    "family",
    "nodes",
    "degree",
    "noise",
    "samples",
    "method",
    "constraint",
    "seed",
    "shd",
    "fdr",
    "tpr",
    "fpr",
    "predicted_edges",
    "final_h",
    "outer_iters",
    "total_matmuls",
    "runtime_s",
    "error",
]

_SUMMARY_METRICS = ["shd", "fdr", "tpr", "fpr", "predicted_edges", "total_matmuls", "runtime_s"]

_CELL_KEYS = ["family", "nodes", "degree", "noise", "samples", "method", "constraint"]


@dataclass
class BenchPlan:
    out_dir: str
    grid: list[dict] = field(default_factory=list)

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchPlan":
        if "out" not in raw or "grid" not in raw or not raw["grid"]:
            raise DomainError("plan must provide an 'out' directory and a nonempty 'grid'")
        cells = []
        for cell in raw["grid"]:
            missing = [k for k in ("family", "nodes", "degree", "noise", "samples", "method", "constraint", "seeds") if k not in cell]
            if missing:
                raise DomainError(f"grid cell missing keys: {missing}")
            if not cell["seeds"]:
                raise DomainError("grid cell has an empty seed list")
            cells.append(cell)
        return cls(out_dir=raw["out"], grid=cells)

    def expand(self) -> list[dict]:
        runs = []
        for cell in self.grid:
            nodes = cell["nodes"] if isinstance(cell["nodes"], (list, tuple)) else [cell["nodes"]]
            for d in nodes:
                for seed in cell["seeds"]:
                    runs.append(
                        {
                            "family": cell["family"],
                            "nodes": int(d),
                            "degree": cell["degree"],
                            "noise": cell["noise"],
                            "samples": int(cell["samples"]),
                            "method": cell["method"],
                            "constraint": cell["constraint"],
                            "seed": int(seed),
                            "solver": dict(cell.get("solver", {})),
                        }
                    )
        return runs


def run_single(run: dict) -> dict:
    """Simulate, learn, and score one grid run. Top level for process pools."""
    row = {k: run[k] for k in _CELL_KEYS + ["seed"]}
    started = time.perf_counter()
    try:
        problem = simulate.make_problem(
            run["family"], run["nodes"], run["degree"], run["noise"], run["samples"], run["seed"]
        )
        overrides = run.get("solver", {})
        if run["method"] == "notears":
            cfg = solver.SolverConfig(constraint=run["constraint"], **overrides)
            result = solver.solve_notears(problem.data, cfg)
        elif run["method"] == "golem":
            cfg = solver.GolemConfig(constraint=run["constraint"], **overrides)
            result = solver.solve_golem(problem.data, cfg)
        else:
            raise DomainError(f"unknown method: {run['method']!r}")
        scored = metrics.score(problem.truth_binary, result.b_thresholded)
        row.update(scored.to_dict())
        row["final_h"] = result.final_h
        row["outer_iters"] = result.outer_iters
        row["total_matmuls"] = result.total_matmuls
        row["runtime_s"] = time.perf_counter() - started
        row["error"] = ""
    except Exception as exc:  # per-row failure must not abort the grid
        row["runtime_s"] = time.perf_counter() - started
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_plan(plan: BenchPlan, jobs: int | None = None) -> tuple[Path, Path]:
    """Execute a plan, returning the results and summary CSV paths."""
    out = Path(plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = plan.expand()

    if jobs is not None and jobs <= 1:
        rows = [run_single(r) for r in runs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_single, runs))

    results_path = out / "results.csv"
    with open(results_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_FIELDS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    summary_path = out / "summary.csv"
    _write_summary(summary_path, rows)
    return results_path, summary_path


def _write_summary(path: Path, rows: list[dict]) -> None:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in _CELL_KEYS), []).append(row)

    fields = list(_CELL_KEYS) + ["n_runs", "n_failed"]
    for m in _SUMMARY_METRICS:
        fields += [f"{m}_mean", f"{m}_stderr"]

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for key, members in groups.items():
            ok = [r for r in members if not r.get("error")]
            out_row = dict(zip(_CELL_KEYS, key))
            out_row["n_runs"] = len(members)
            out_row["n_failed"] = len(members) - len(ok)
            for m in _SUMMARY_METRICS:
                values = [float(r[m]) for r in ok if m in r]
                if values:
                    mean = sum(values) / len(values)
                    if len(values) > 1:
                        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
                        stderr = math.sqrt(var / len(values))
                    else:
                        stderr = 0.0
                    out_row[f"{m}_mean"] = f"{mean:.17g}"
                    out_row[f"{m}_stderr"] = f"{stderr:.17g}"
                else:
                    out_row[f"{m}_mean"] = ""
                    out_row[f"{m}_stderr"] = ""
            writer.writerow(out_row)
