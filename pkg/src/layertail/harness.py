"""Replicated simulation experiments over scenario/size grids.

A plan is a grid of (scenario, size) cells.  Each replication samples
weights, builds the graph, computes degrees, and estimates UTD twice: from
the weight columns and from the degree columns (layers 0 and 1).  Every
replication owns a generator seeded by ``(master_seed, cell_index,
replication_index)``, so results are bitwise identical no matter how the work
is scheduled across processes.

Wall-clock timings are kept on the in-memory report only; none of the CSV
exports contain them, so a fixed master seed reproduces output files byte for
byte.
"""

from __future__ import annotations

import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .mirg import build_graph, degrees
from .tailstats import (
    ThresholdSpec,
    TopCount,
    replication_summary,
    resolve_top_count,
    utd_estimate,
)
from .weights import (
    DependenceScenario,
    sample_weights,
    scenario_label,
    scenario_true_utd,
)

__all__ = [
    "ExperimentPlan",
    "CellResult",
    "ExperimentReport",
    "replication_rng",
    "run_replication",
    "run_plan",
    "write_report_csv",
    "write_mse_csv",
    "write_scatter_csvs",
    "REPORT_HEADER",
]

_BACKENDS = ("auto", "pairwise", "fast")

REPORT_HEADER = (
    "scenario,N,t_n,truth,mean_w,mean_d,mse_w,mse_d,"
    "scaledvar_w,scaledvar_d,n_reps,degenerate_count"
)


@dataclass(frozen=True)
class ExperimentPlan:
    scenarios: tuple
    sizes: tuple
    threshold: ThresholdSpec = field(default_factory=lambda: TopCount(100))
    replications: int = 200
    backend: str = "auto"
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.scenarios:
            raise ParameterError("plan needs at least one scenario")
        if not self.sizes:
            raise ParameterError("plan needs at least one size")
        if self.replications < 1:
            raise ParameterError("plan needs at least one replication")
        if self.backend not in _BACKENDS:
            raise ParameterError(f"unknown backend {self.backend!r}")
        if self.master_seed < 0:
            raise ParameterError("master seed must be non-negative")
        for n in self.sizes:
            resolve_top_count(self.threshold, n)  # raises if t >= n

    @property
    def cells(self):
        """(scenario, size) pairs in deterministic grid order."""
        return [(sc, n) for sc in self.scenarios for n in self.sizes]


@dataclass
class CellResult:
    scenario: str
    n_nodes: int
    t_n: int
    truth: float
    mean_w: float
    mean_d: float
    mse_w: float
    mse_d: float
    scaledvar_w: float
    scaledvar_d: float
    n_reps: int
    degenerate_count: int
    flagged: bool
    lambda_w: np.ndarray
    lambda_d: np.ndarray
    compute_seconds: float


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    cells: list


def replication_rng(master_seed: int, cell_index: int, rep_index: int) -> np.random.Generator:
    """The canonical per-replication generator; see the module docstring."""
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, cell_index, rep_index))
    )


def run_replication(
    scenario: DependenceScenario,
    n_nodes: int,
    threshold: ThresholdSpec,
    backend: str,
    rng: np.random.Generator,
):
    """One replication; returns (weight-based, degree-based) UTD estimates."""
    wm = sample_weights(scenario, n_nodes, rng)
    graph = build_graph(wm, rng, backend=backend)
    deg = degrees(graph)
    est_w = utd_estimate(wm.values[:, 0], wm.values[:, 1], threshold)
    est_d = utd_estimate(deg.values[:, 0], deg.values[:, 1], threshold)
    return est_w, est_d


def _run_task(task):
    scenario, n_nodes, threshold, backend, master_seed, cell_idx, rep_idx = task
    rng = replication_rng(master_seed, cell_idx, rep_idx)
    start = time.perf_counter()
    est_w, est_d = run_replication(scenario, n_nodes, threshold, backend, rng)
    elapsed = time.perf_counter() - start
    return (
        cell_idx,
        rep_idx,
        est_w.lambda_hat,
        est_d.lambda_hat,
        est_w.degenerate,
        est_d.degenerate,
        elapsed,
    )


def run_plan(plan: ExperimentPlan, workers: int | None = None) -> ExperimentReport:
    """Run every cell of the plan, optionally across a process pool.

    ``workers=None`` (or 0/1) runs sequentially in this process.  Larger
    values use a process pool; the per-replication seeding makes the two
    modes produce identical reports.
    """
    cells = plan.cells
    n_reps = plan.replications
    tasks = [
        (sc, n, plan.threshold, plan.backend, plan.master_seed, ci, ri)
        for ci, (sc, n) in enumerate(cells)
        for ri in range(n_reps)
    ]
    lam_w = np.empty((len(cells), n_reps))
    lam_d = np.empty((len(cells), n_reps))
    degen = np.zeros((len(cells), n_reps), dtype=bool)
    secs = np.zeros(len(cells))
    if workers is None or workers <= 1:
        results = map(_run_task, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        chunk = max(1, len(tasks) // (workers * 8))
        results = pool.map(_run_task, tasks, chunksize=chunk)
    for ci, ri, lw, ld, dw, dd, dt in results:
        lam_w[ci, ri] = lw
        lam_d[ci, ri] = ld
        degen[ci, ri] = dw or dd
        secs[ci] += dt
    if workers is not None and workers > 1:
        pool.shutdown()

    truths = {}
    out = []
    for ci, (sc, n) in enumerate(cells):
        label = scenario_label(sc)
        if label not in truths:
            truths[label] = scenario_true_utd(sc)
        truth = truths[label]
        t_n = resolve_top_count(plan.threshold, n)
        sum_w = replication_summary(lam_w[ci], truth, t_n)
        sum_d = replication_summary(lam_d[ci], truth, t_n)
        degenerate_count = int(degen[ci].sum())
        flagged = degenerate_count > 0.1 * n_reps
        if flagged:
            warnings.warn(
                f"cell {label} N={n}: {degenerate_count}/{n_reps} degenerate "
                "replications",
                stacklevel=2,
            )
        out.append(
            CellResult(
                scenario=label,
                n_nodes=n,
                t_n=t_n,
                truth=truth,
                mean_w=sum_w.mean,
                mean_d=sum_d.mean,
                mse_w=sum_w.mse,
                mse_d=sum_d.mse,
                scaledvar_w=sum_w.scaled_variance,
                scaledvar_d=sum_d.scaled_variance,
                n_reps=n_reps,
                degenerate_count=degenerate_count,
                flagged=flagged,
                lambda_w=lam_w[ci].copy(),
                lambda_d=lam_d[ci].copy(),
                compute_seconds=float(secs[ci]),
            )
        )
    return ExperimentReport(plan=plan, cells=out)


# ---------------------------------------------------------------------------
# CSV exports (deterministic: fixed float format, no timestamps)
# ---------------------------------------------------------------------------

_F = "%.10g"


def write_report_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REPORT_HEADER + "\n")
        for c in report.cells:
            row = [
                c.scenario,
                str(c.n_nodes),
                str(c.t_n),
                _F % c.truth,
                _F % c.mean_w,
                _F % c.mean_d,
                _F % c.mse_w,
                _F % c.mse_d,
                _F % c.scaledvar_w,
                _F % c.scaledvar_d,
                str(c.n_reps),
                str(c.degenerate_count),
            ]
            fh.write(",".join(row) + "\n")


def write_mse_csv(report: ExperimentReport, path) -> None:
    """Long-format MSE rows (one per cell and target) for decay curves."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("scenario,N,target,mse\n")
        for c in report.cells:
            fh.write(f"{c.scenario},{c.n_nodes},weights,{_F % c.mse_w}\n")
            fh.write(f"{c.scenario},{c.n_nodes},degrees,{_F % c.mse_d}\n")


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def write_scatter_csvs(report: ExperimentReport, directory) -> list:
    """One rep,lambda_w,lambda_d file per cell; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for c in report.cells:
        path = directory / f"scatter_{_slug(c.scenario)}_N{c.n_nodes}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("rep,lambda_w,lambda_d\n")
            for r in range(c.n_reps):
                fh.write(f"{r},{_F % c.lambda_w[r]},{_F % c.lambda_d[r]}\n")
        written.append(path)
    return written
