"""Degree analysis of observed directed edge lists over consecutive periods.

The pipeline mirrors the simulation side: per-period edge lists become degree
samples, consecutive periods are restricted to their common nodes, and the
UTD estimator runs on the paired degree vectors.  An optional price table
turns period pairs into (UTD, shrinkage) points for correlation.

Degree convention: every stored edge copy adds 1 to both endpoints, so a
mutual pair a->b plus b->a gives both nodes degree 2, and a self-loop a->a
gives node a degree 2 (one as source, one as target).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    DegenerateSeriesError,
    EdgeListParseError,
    ParameterError,
)
from .tailstats import (
    ThresholdSpec,
    TopCount,
    hill_tail_index,
    pearson_correlation,
    utd_estimate,
)

__all__ = [
    "ParseDiagnostic",
    "DirectedEdgeList",
    "parse_edge_list",
    "write_directed_edge_list",
    "period_degrees",
    "PairedDegreeSeries",
    "paired_degrees",
    "UtdSeriesEntry",
    "utd_series",
    "PriceSeries",
    "shrinkage_ratio",
    "align_series",
    "correlate_series",
    "PeriodTailIndex",
    "tail_index_report",
    "write_utd_series_csv",
    "write_hill_csv",
    "write_combined_csv",
]

_SPLIT_ANY = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class ParseDiagnostic:
    line_no: int
    text: str
    reason: str


@dataclass
class DirectedEdgeList:
    """Edges of one observation period, duplicates preserved in file order."""

    period: str
    edges: list
    diagnostics: list = field(default_factory=list)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def node_set(self) -> set:
        nodes = set()
        for s, t in self.edges:
            nodes.add(s)
            nodes.add(t)
        return nodes


def parse_edge_list(source, period: str | None = None, delimiter: str | None = None) -> DirectedEdgeList:
    """Parse a directed edge list from a path or an open text stream.

    One edge per line as ``source target`` (whitespace- or comma-delimited by
    default, or split on an explicit ``delimiter``).  Lines starting with
    ``#`` and blank lines are skipped; trailing fields beyond the first two
    are ignored.  Malformed lines are collected as diagnostics with their
    1-based line number instead of aborting.  A file that yields no valid
    edge at all raises :class:`EdgeListParseError`.
    """
    if hasattr(source, "read"):
        name = period if period is not None else getattr(source, "name", "<stream>")
        lines = source.read().splitlines()
    else:
        path = Path(source)
        name = period if period is not None else path.stem
        lines = path.read_text(encoding="utf-8").splitlines()
    edges = []
    diagnostics = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if delimiter is None:
            fields = _SPLIT_ANY.split(line)
        else:
            fields = [f.strip() for f in line.split(delimiter)]
        fields = [f for f in fields if f]
        if len(fields) < 2:
            diagnostics.append(
                ParseDiagnostic(line_no, raw, "expected at least two fields")
            )
            continue
        edges.append((fields[0], fields[1]))
    if not edges:
        raise EdgeListParseError(f"{name}: no valid edges found")
    return DirectedEdgeList(period=str(name), edges=edges, diagnostics=diagnostics)


def write_directed_edge_list(edge_list: DirectedEdgeList, path) -> None:
    """Export as one ``source target`` line per edge copy, order preserved.

    Re-parsing the written file yields the same period label (when it is
    passed back) and the identical edge sequence.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for s, t in edge_list.edges:
            fh.write(f"{s} {t}\n")


def period_degrees(edge_list: DirectedEdgeList) -> dict:
    """Degree of every node appearing in the period (see module docstring)."""
    deg: dict = {}
    for s, t in edge_list.edges:
        deg[s] = deg.get(s, 0) + 1
        deg[t] = deg.get(t, 0) + 1
    return deg


@dataclass
class PairedDegreeSeries:
    period_a: str
    period_b: str
    nodes: list
    deg_a: np.ndarray
    deg_b: np.ndarray

    @property
    def pair(self) -> str:
        return f"{self.period_a}->{self.period_b}"

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def paired_degrees(first: DirectedEdgeList, second: DirectedEdgeList) -> PairedDegreeSeries:
    """Degrees of both periods restricted to their common nodes.

    Edges with an endpoint outside the intersection are dropped before
    counting, so both degree vectors describe the same induced node set.
    An empty intersection raises :class:`DegenerateSeriesError`.
    """
    common = first.node_set() & second.node_set()
    if not common:
        raise DegenerateSeriesError(
            f"periods {first.period!r} and {second.period!r} share no nodes"
        )
    nodes = sorted(common)
    index = {node: pos for pos, node in enumerate(nodes)}
    deg_a = np.zeros(len(nodes), dtype=np.int64)
    deg_b = np.zeros(len(nodes), dtype=np.int64)
    for out, lst in ((deg_a, first), (deg_b, second)):
        for s, t in lst.edges:
            si = index.get(s)
            ti = index.get(t)
            if si is None or ti is None:
                continue
            out[si] += 1
            out[ti] += 1
    return PairedDegreeSeries(
        period_a=first.period,
        period_b=second.period,
        nodes=nodes,
        deg_a=deg_a,
        deg_b=deg_b,
    )


@dataclass(frozen=True)
class UtdSeriesEntry:
    period_a: str
    period_b: str
    lambda_hat: float
    t_n: int
    degenerate: bool
    n_nodes: int

    @property
    def pair(self) -> str:
        return f"{self.period_a}->{self.period_b}"


def utd_series(periods, spec: ThresholdSpec | None = None) -> list:
    """UTD estimates for every consecutive period pair.

    Pairs that cannot be estimated (no common nodes, or fewer nodes than the
    threshold rule needs) are recorded with ``degenerate=True`` and
    ``lambda_hat=0`` rather than aborting the series.
    """
    periods = list(periods)
    if len(periods) < 2:
        raise ParameterError("need at least two periods for a UTD series")
    spec = spec if spec is not None else TopCount(100)
    entries = []
    for first, second in zip(periods, periods[1:]):
        try:
            paired = paired_degrees(first, second)
            est = utd_estimate(paired.deg_a, paired.deg_b, spec)
            entries.append(
                UtdSeriesEntry(
                    period_a=first.period,
                    period_b=second.period,
                    lambda_hat=est.lambda_hat,
                    t_n=est.t_n,
                    degenerate=est.degenerate,
                    n_nodes=paired.n_nodes,
                )
            )
        except (DegenerateSeriesError, ParameterError):
            entries.append(
                UtdSeriesEntry(
                    period_a=first.period,
                    period_b=second.period,
                    lambda_hat=0.0,
                    t_n=0,
                    degenerate=True,
                    n_nodes=0,
                )
            )
    return entries


# ---------------------------------------------------------------------------
# Price series and correlation
# ---------------------------------------------------------------------------


@dataclass
class PriceSeries:
    """Per-period initial and final prices, keyed by period label."""

    prices: dict

    @classmethod
    def read_csv(cls, path) -> "PriceSeries":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        rows = [ln.strip() for ln in lines if ln.strip()]
        if not rows or [c.strip() for c in rows[0].split(",")] != [
            "period",
            "initial_price",
            "final_price",
        ]:
            raise ParameterError(
                "price CSV must start with header 'period,initial_price,final_price'"
            )
        prices = {}
        for line_no, row in enumerate(rows[1:], start=2):
            cells = [c.strip() for c in row.split(",")]
            if len(cells) != 3:
                raise ParameterError(f"price CSV line {line_no}: expected 3 cells")
            period = cells[0]
            try:
                initial, final = float(cells[1]), float(cells[2])
            except ValueError as exc:
                raise ParameterError(f"price CSV line {line_no}: {exc}") from exc
            if initial <= 0 or final <= 0:
                raise ParameterError(f"price CSV line {line_no}: prices must be positive")
            if period in prices:
                raise ParameterError(f"price CSV line {line_no}: duplicate period {period!r}")
            prices[period] = (initial, final)
        if not prices:
            raise ParameterError("price CSV has no data rows")
        return cls(prices=prices)

    def __contains__(self, period) -> bool:
        return period in self.prices


def shrinkage_ratio(prices: PriceSeries, period: str) -> float:
    """(initial - final) / initial; positive when the price fell."""
    if period not in prices.prices:
        raise KeyError(period)
    initial, final = prices.prices[period]
    return (initial - final) / initial


def align_series(entries, prices: PriceSeries, align: str = "second"):
    """Pair non-degenerate UTD entries with per-period shrinkage ratios.

    ``align="second"`` attaches the shrinkage of the later period of each
    pair (the default), ``align="first"`` the earlier.  Returns (pair labels,
    utd array, shrinkage array).  Periods missing from the price table raise
    :class:`AlignmentError` naming them.
    """
    if align not in ("first", "second"):
        raise ParameterError(f"align must be 'first' or 'second', got {align!r}")
    usable = [e for e in entries if not e.degenerate]
    wanted = [e.period_a if align == "first" else e.period_b for e in usable]
    missing = sorted({p for p in wanted if p not in prices})
    if missing:
        raise AlignmentError(
            "price table is missing period(s): " + ", ".join(missing)
        )
    labels = [e.pair for e in usable]
    utd = np.array([e.lambda_hat for e in usable])
    shrink = np.array([shrinkage_ratio(prices, p) for p in wanted])
    return labels, utd, shrink


def correlate_series(utd_values, shrinkage_values) -> float:
    """Pearson correlation between aligned UTD and shrinkage series."""
    u = np.asarray(utd_values, dtype=float).ravel()
    s = np.asarray(shrinkage_values, dtype=float).ravel()
    if u.shape != s.shape:
        raise AlignmentError(f"series differ in length: {u.size} vs {s.size}")
    return pearson_correlation(u, s)


# ---------------------------------------------------------------------------
# Tail-index screening
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodTailIndex:
    period: str
    n_nodes: int
    k_top: int
    alpha_hat: float
    in_range: bool


def tail_index_report(periods, k_top: int | None = None) -> list:
    """Hill tail index of each period's own degree sample.

    ``k_top`` defaults to ceil(0.05 * n) per period.  ``in_range`` records
    whether the estimate lies in the infinite-variance, finite-mean band
    (1, 2) that the asymptotic theory assumes.
    """
    out = []
    for p in periods:
        deg = np.array(sorted(period_degrees(p).values()), dtype=float)
        n = deg.size
        k = k_top if k_top is not None else max(1, math.ceil(0.05 * n))
        k = min(k, n - 1)
        alpha = hill_tail_index(deg, k)
        out.append(
            PeriodTailIndex(
                period=p.period,
                n_nodes=n,
                k_top=k,
                alpha_hat=alpha,
                in_range=bool(1.0 < alpha < 2.0),
            )
        )
    return out


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------

_F = "%.10g"


def write_utd_series_csv(entries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("pair,lambda,t_n,degenerate\n")
        for e in entries:
            flag = "true" if e.degenerate else "false"
            fh.write(f"{e.pair},{_F % e.lambda_hat},{e.t_n},{flag}\n")


def write_hill_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("period,n_nodes,k_top,alpha_hat,in_range\n")
        for r in report:
            flag = "true" if r.in_range else "false"
            fh.write(f"{r.period},{r.n_nodes},{r.k_top},{_F % r.alpha_hat},{flag}\n")


def write_combined_csv(labels, utd, shrink, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("pair,lambda,shrinkage\n")
        for lab, u, s in zip(labels, utd, shrink):
            fh.write(f"{lab},{_F % u},{_F % s}\n")
