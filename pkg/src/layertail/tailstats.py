"""Empirical tail statistics: UTD estimation, Hill index, replication summaries.

The upper-tail-dependence estimator is the conditional exceedance ratio: fix a
per-sample threshold at the (N - t)-th smallest order statistic (the ECDF
generalized inverse at 1 - t/N), call an observation exceeding when it is
strictly above its threshold, and report

    lambda_hat = #{both samples exceed} / #{first sample exceeds}.

Ties at the threshold therefore shrink the exceedance sets together rather
than being split arbitrarily, which is what makes the estimator usable on
integer degree samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

from .errors import (
    ParameterError,
    ShapeError,
    UndefinedCorrelationError,
)

__all__ = [
    "TopCount",
    "QuantileLevel",
    "ThresholdSpec",
    "resolve_top_count",
    "empirical_threshold",
    "UtdEstimate",
    "utd_estimate",
    "hill_tail_index",
    "hill_profile",
    "pearson_correlation",
    "ReplicationSummary",
    "replication_summary",
]


@dataclass(frozen=True)
class TopCount:
    """Threshold rule: use the top ``t_n`` order statistics."""

    t_n: int

    def __post_init__(self):
        if int(self.t_n) != self.t_n or self.t_n < 1:
            raise ParameterError(f"top count must be an integer >= 1, got {self.t_n}")
        object.__setattr__(self, "t_n", int(self.t_n))


@dataclass(frozen=True)
class QuantileLevel:
    """Threshold rule: empirical quantile level q in (0, 1)."""

    q: float

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ParameterError(f"quantile level must lie in (0, 1), got {self.q}")


ThresholdSpec = Union[TopCount, QuantileLevel]


def resolve_top_count(spec: ThresholdSpec, n: int) -> int:
    """Map a threshold rule to a concrete top count for sample size ``n``.

    QuantileLevel q maps to round(n * (1 - q)) with half rounding up, clamped
    below by 1.  The resolved count must be strictly smaller than ``n``.
    """
    if n < 2:
        raise ParameterError("need a sample of size at least 2")
    if isinstance(spec, TopCount):
        t = spec.t_n
    elif isinstance(spec, QuantileLevel):
        t = max(int(math.floor(n * (1.0 - spec.q) + 0.5)), 1)
    else:
        raise ParameterError(f"unknown threshold spec {type(spec).__name__}")
    if t >= n:
        raise ParameterError(f"top count {t} must be smaller than the sample size {n}")
    return t


def empirical_threshold(sample, t_n: int) -> float:
    """The (n - t_n)-th smallest value: ECDF generalized inverse at 1 - t_n/n."""
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ParameterError("need a sample of size at least 2")
    if not (1 <= t_n < n):
        raise ParameterError(f"top count must satisfy 1 <= t < {n}, got {t_n}")
    pos = n - t_n - 1
    return float(np.partition(x, pos)[pos])


@dataclass(frozen=True)
class UtdEstimate:
    """One UTD estimate together with its exceedance bookkeeping.

    ``degenerate`` is set when the first sample has no strict exceedances
    (all top values tied through the threshold), in which case ``lambda_hat``
    is reported as 0 by convention rather than 0/0.
    """

    lambda_hat: float
    t_n: int
    threshold_1: float
    threshold_2: float
    marginal_exceedances: int
    joint_exceedances: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def utd_estimate(sample_1, sample_2, spec: ThresholdSpec) -> UtdEstimate:
    """Conditional-ratio UTD estimate between two equally long samples."""
    x = np.asarray(sample_1, dtype=float).ravel()
    y = np.asarray(sample_2, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"samples differ in length: {x.size} vs {y.size}")
    if x.size < 2:
        raise ParameterError("need samples of size at least 2")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("samples must be finite")
    t = resolve_top_count(spec, x.size)
    u1 = empirical_threshold(x, t)
    u2 = empirical_threshold(y, t)
    exceed_1 = x > u1
    marginal = int(np.count_nonzero(exceed_1))
    joint = int(np.count_nonzero(exceed_1 & (y > u2)))
    if marginal == 0:
        return UtdEstimate(0.0, t, u1, u2, 0, 0, degenerate=True)
    return UtdEstimate(joint / marginal, t, u1, u2, marginal, joint)


def hill_tail_index(sample, k_top: int) -> float:
    """Hill estimator of the tail index from the top ``k_top`` order statistics.

    With X_(1) >= ... >= X_(n) the estimate is
    ``1 / mean(log(X_(i) / X_(k+1)), i = 1..k)``.  Scale-invariant; raising the
    sample to a power c divides the estimate by c exactly.  Returns ``inf``
    when the top k+1 values are all equal.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if int(k_top) != k_top or k_top < 1:
        raise ParameterError(f"k_top must be an integer >= 1, got {k_top}")
    k_top = int(k_top)
    if x.size < k_top + 1:
        raise ParameterError(
            f"need at least k_top + 1 = {k_top + 1} observations, got {x.size}"
        )
    top = np.sort(x)[-(k_top + 1):]
    if top[0] <= 0.0 or not np.all(np.isfinite(top)):
        raise ParameterError("the top k_top + 1 values must be finite and positive")
    mean_log = float(np.mean(np.log(top[1:]) - math.log(top[0])))
    if mean_log == 0.0:
        return math.inf
    return 1.0 / mean_log


def hill_profile(sample, k_values) -> np.ndarray:
    """Hill estimates over a grid of k values (for Hill-plot exports)."""
    return np.array([hill_tail_index(sample, int(k)) for k in k_values])


def pearson_correlation(x, y) -> float:
    """Pearson correlation; zero variance in either input is an error."""
    a = np.asarray(x, dtype=float).ravel()
    b = np.asarray(y, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"series differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise ParameterError("need at least two paired observations")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ParameterError("series must be finite")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance series")
    return float(np.clip((da @ db) / denom, -1.0, 1.0))


@dataclass(frozen=True)
class ReplicationSummary:
    mean: float
    mse: float
    scaled_variance: float


def replication_summary(estimates, truth: float, t_n: int) -> ReplicationSummary:
    """Mean, MSE against ``truth`` and t_n-scaled sample variance (ddof=1)."""
    e = np.asarray(estimates, dtype=float).ravel()
    if e.size < 2:
        raise ParameterError("need at least two replication estimates")
    if not np.all(np.isfinite(e)) or not math.isfinite(truth):
        raise ParameterError("estimates and truth must be finite")
    if int(t_n) != t_n or t_n < 1:
        raise ParameterError(f"t_n must be an integer >= 1, got {t_n}")
    mean = float(e.mean())
    mse = float(np.mean((e - truth) ** 2))
    scaled_variance = float(t_n * e.var(ddof=1))
    return ReplicationSummary(mean=mean, mse=mse, scaled_variance=scaled_variance)
